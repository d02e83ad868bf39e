#pragma once

#include <map>
#include <string>
#include <vector>

#include "tactictraj/errors.hpp"
#include "tactictraj/rng.hpp"
#include "tactictraj/tensor.hpp"

namespace tactictraj {

/// Named parameter tensors plus gradient slots of identical shape.
/// Iteration order is sorted by name (std::map), which keeps optimizer
/// updates and checkpoint layout deterministic.
class ParamStore {
public:
    Tensor& add(const std::string& name, Tensor init) {
        if (params_.count(name)) throw ConfigError("duplicate parameter: " + name);
        grads_.emplace(name, Tensor::zeros(init.shape()));
        return params_.emplace(name, std::move(init)).first->second;
    }

    bool has(const std::string& name) const { return params_.count(name) != 0; }

    Tensor& param(const std::string& name) {
        auto it = params_.find(name);
        if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
        return it->second;
    }
    const Tensor& param(const std::string& name) const {
        auto it = params_.find(name);
        if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
        return it->second;
    }

    Tensor& grad(const std::string& name) {
        auto it = grads_.find(name);
        if (it == grads_.end()) throw ConfigError("unknown parameter: " + name);
        return it->second;
    }
    const Tensor& grad(const std::string& name) const {
        auto it = grads_.find(name);
        if (it == grads_.end()) throw ConfigError("unknown parameter: " + name);
        return it->second;
    }

    void zero_grads() {
        for (auto& [name, g] : grads_) std::fill(g.data().begin(), g.data().end(), 0.0);
    }

    void accumulate_grad(const std::string& name, const Tensor& g) {
        Tensor& slot = grad(name);
        if (!slot.same_shape(g)) {
            throw ShapeError("gradient shape mismatch for " + name + ": " +
                             Tensor::shape_string(slot.shape()) + " vs " +
                             Tensor::shape_string(g.shape()));
        }
        for (std::size_t i = 0; i < slot.numel(); ++i) slot[i] += g[i];
    }

    const std::map<std::string, Tensor>& params() const { return params_; }
    std::map<std::string, Tensor>& params() { return params_; }
    const std::map<std::string, Tensor>& grads() const { return grads_; }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(params_.size());
        for (const auto& [name, t] : params_) out.push_back(name);
        return out;
    }

    std::size_t total_size() const {
        std::size_t n = 0;
        for (const auto& [name, t] : params_) n += t.numel();
        return n;
    }

private:
    std::map<std::string, Tensor> params_;
    std::map<std::string, Tensor> grads_;
};

/// Xavier-uniform init for a fan_in x fan_out weight matrix.
inline Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, SeededRng& rng,
                             double gain = 1.0) {
    const double limit = gain * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t({fan_in, fan_out});
    for (double& v : t.data()) v = rng.uniform_range(-limit, limit);
    return t;
}

}  // namespace tactictraj
