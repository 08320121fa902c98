#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2026 The admarket Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------
//
// A small fully connected network with tanh hidden layers and a scalar
// head, sized for the 8-feature observations used here. Backpropagation is
// written out by hand and checked against central finite differences in
// the tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace admarket {

class Mlp {
public:
    enum class Head { kLinear, kTanhScaled };

    struct Layer {
        int in = 0;
        int out = 0;
        std::vector<double> w;  // out x in, row-major
        std::vector<double> b;
    };

    /// Per-layer parameter gradients, shaped like the network.
    struct Gradients {
        std::vector<std::vector<double>> w;
        std::vector<std::vector<double>> b;
    };

    /// Forward-pass cache: activations per layer (act[0] is the input).
    struct Trace {
        std::vector<std::vector<double>> act;
        double pre_out = 0.0;  // head pre-activation
        double out = 0.0;
    };

    Mlp() = default;

    /// Layer sizes include input and the scalar output, e.g. {8, 32, 32, 1}.
    /// Weights and biases start uniform in +-1/sqrt(fan_in).
    Mlp(const std::vector<int>& sizes, Head head, double head_scale,
        std::mt19937_64& rng)
        : head_(head), head_scale_(head_scale) {
        if (sizes.size() < 2 || sizes.back() != 1) {
            throw std::invalid_argument("mlp: need >= 2 layer sizes with scalar output");
        }
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            Layer layer;
            layer.in = sizes[l];
            layer.out = sizes[l + 1];
            const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
            std::uniform_real_distribution<double> u(-bound, bound);
            layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
            layer.b.resize(static_cast<std::size_t>(layer.out));
            for (auto& v : layer.w) v = u(rng);
            for (auto& v : layer.b) v = u(rng);
            layers_.push_back(std::move(layer));
        }
    }

    int input_size() const { return layers_.empty() ? 0 : layers_.front().in; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }
    Head head() const { return head_; }
    double head_scale() const { return head_scale_; }

    double forward(std::span<const double> x, Trace& tr) const {
        if (static_cast<int>(x.size()) != input_size()) {
            throw std::invalid_argument("mlp: input size mismatch");
        }
        tr.act.assign(layers_.size() + 1, {});
        tr.act[0].assign(x.begin(), x.end());
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const Layer& L = layers_[l];
            const auto& a = tr.act[l];
            auto& next = tr.act[l + 1];
            next.assign(static_cast<std::size_t>(L.out), 0.0);
            for (int o = 0; o < L.out; ++o) {
                double z = L.b[static_cast<std::size_t>(o)];
                const double* row = &L.w[static_cast<std::size_t>(o) * L.in];
                for (int i = 0; i < L.in; ++i) z += row[i] * a[static_cast<std::size_t>(i)];
                if (l + 1 < layers_.size()) {
                    next[static_cast<std::size_t>(o)] = std::tanh(z);
                } else {
                    tr.pre_out = z;
                    next[static_cast<std::size_t>(o)] =
                        head_ == Head::kLinear ? z : head_scale_ * std::tanh(z);
                }
            }
        }
        tr.out = tr.act.back()[0];
        return tr.out;
    }

    double value(std::span<const double> x) const {
        Trace tr;
        return forward(x, tr);
    }

    Gradients zero_gradients() const {
        Gradients g;
        g.w.resize(layers_.size());
        g.b.resize(layers_.size());
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            g.w[l].assign(layers_[l].w.size(), 0.0);
            g.b[l].assign(layers_[l].b.size(), 0.0);
        }
        return g;
    }

    /// Accumulates d(out)/d(params) * dout into `grads`; optionally also
    /// returns d(out)/d(input) * dout through `dinput`.
    void backward(const Trace& tr, double dout, Gradients& grads,
                  std::vector<double>* dinput = nullptr) const {
        std::vector<double> delta(1);
        delta[0] = head_ == Head::kLinear
                       ? dout
                       : dout * head_scale_ *
                             (1.0 - std::tanh(tr.pre_out) * std::tanh(tr.pre_out));
        for (std::size_t l = layers_.size(); l-- > 0;) {
            const Layer& L = layers_[l];
            const auto& a = tr.act[l];
            auto& gw = grads.w[l];
            auto& gb = grads.b[l];
            std::vector<double> prev(static_cast<std::size_t>(L.in), 0.0);
            for (int o = 0; o < L.out; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                gb[static_cast<std::size_t>(o)] += d;
                const std::size_t base = static_cast<std::size_t>(o) * L.in;
                for (int i = 0; i < L.in; ++i) {
                    gw[base + static_cast<std::size_t>(i)] += d * a[static_cast<std::size_t>(i)];
                    prev[static_cast<std::size_t>(i)] += d * L.w[base + static_cast<std::size_t>(i)];
                }
            }
            if (l > 0) {
                // chain through the tanh of the previous hidden layer
                for (int i = 0; i < L.in; ++i) {
                    const double act = a[static_cast<std::size_t>(i)];
                    prev[static_cast<std::size_t>(i)] *= 1.0 - act * act;
                }
            }
            delta = std::move(prev);
        }
        if (dinput) *dinput = std::move(delta);
    }

    /// params += scale * grads. Plain SGD: the caller picks the sign.
    void apply(const Gradients& grads, double scale) {
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            auto& L = layers_[l];
            for (std::size_t i = 0; i < L.w.size(); ++i) L.w[i] += scale * grads.w[l][i];
            for (std::size_t i = 0; i < L.b.size(); ++i) L.b[i] += scale * grads.b[l][i];
        }
    }

    /// params *= factor (multiplicative weight decay).
    void scale_params(double factor) {
        for (auto& L : layers_) {
            for (auto& v : L.w) v *= factor;
            for (auto& v : L.b) v *= factor;
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["head"] = head_ == Head::kLinear ? "linear" : "tanh_scaled";
        j["head_scale"] = head_scale_;
        std::vector<int> sizes;
        sizes.push_back(input_size());
        for (const auto& L : layers_) sizes.push_back(L.out);
        j["sizes"] = sizes;
        auto& weights = j["weights"] = nlohmann::json::array();
        auto& biases = j["biases"] = nlohmann::json::array();
        for (const auto& L : layers_) {
            weights.push_back(L.w);
            biases.push_back(L.b);
        }
        return j;
    }

    static Mlp from_json(const nlohmann::json& j) {
        Mlp net;
        net.head_ = j.at("head").get<std::string>() == "linear" ? Head::kLinear
                                                                : Head::kTanhScaled;
        net.head_scale_ = j.at("head_scale").get<double>();
        const auto sizes = j.at("sizes").get<std::vector<int>>();
        const auto& weights = j.at("weights");
        const auto& biases = j.at("biases");
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            Layer L;
            L.in = sizes[l];
            L.out = sizes[l + 1];
            L.w = weights.at(l).get<std::vector<double>>();
            L.b = biases.at(l).get<std::vector<double>>();
            if (L.w.size() != static_cast<std::size_t>(L.in) * L.out ||
                L.b.size() != static_cast<std::size_t>(L.out)) {
                throw std::invalid_argument("mlp: checkpoint shape mismatch");
            }
            net.layers_.push_back(std::move(L));
        }
        return net;
    }

private:
    std::vector<Layer> layers_;
    Head head_ = Head::kLinear;
    double head_scale_ = 1.0;
};

}  // namespace admarket
