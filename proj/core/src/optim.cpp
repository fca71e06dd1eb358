#include "auricle/optim.hpp"

#include <cmath>

#include "auricle/errors.hpp"

namespace auricle {

Adam::Slot& Adam::slot_for(const std::string& name, const std::vector<std::int64_t>& shape) {
    for (Slot& s : slots_) {
        if (s.name == name) {
            if (s.m.shape() != shape) {
                throw TrainingError("adam: moment shape for '" + name + "' is " +
                                    Tensor::shape_string(s.m.shape()) + " but parameter is " +
                                    Tensor::shape_string(shape));
            }
            return s;
        }
    }
    slots_.push_back({name, Tensor(shape), Tensor(shape)});
    return slots_.back();
}

void Adam::step(const std::vector<std::pair<std::string, Tensor*>>& params,
                const std::vector<std::pair<std::string, Tensor*>>& grads) {
    if (params.size() != grads.size()) {
        throw TrainingError("adam: " + std::to_string(params.size()) + " parameters but " +
                            std::to_string(grads.size()) + " gradients");
    }
    ++t_;
    // Running powers in float to keep the whole update in one precision.
    const float bc1 = 1.0f - std::pow(cfg_.beta1, static_cast<float>(t_));
    const float bc2 = 1.0f - std::pow(cfg_.beta2, static_cast<float>(t_));

    for (std::size_t p = 0; p < params.size(); ++p) {
        const std::string& name = params[p].first;
        if (grads[p].first != name) {
            throw TrainingError("adam: gradient list order mismatch at '" + name + "' vs '" +
                                grads[p].first + "'");
        }
        Tensor& w = *params[p].second;
        const Tensor& g = *grads[p].second;
        if (!w.same_shape(g)) {
            throw TrainingError("adam: gradient shape mismatch for '" + name + "'");
        }
        if (!all_finite(g)) {
            throw TrainingError("adam: non-finite gradient for parameter '" + name + "'");
        }
        Slot& s = slot_for(name, w.shape());
        for (std::int64_t i = 0; i < w.numel(); ++i) {
            s.m[i] = cfg_.beta1 * s.m[i] + (1.0f - cfg_.beta1) * g[i];
            s.v[i] = cfg_.beta2 * s.v[i] + (1.0f - cfg_.beta2) * g[i] * g[i];
            const float mhat = s.m[i] / bc1;
            const float vhat = s.v[i] / bc2;
            w[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

std::vector<std::pair<std::string, Tensor>> Adam::export_state() const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (const Slot& s : slots_) {
        out.emplace_back("optim.m." + s.name, s.m);
        out.emplace_back("optim.v." + s.name, s.v);
    }
    Tensor t({1});
    t[0] = static_cast<float>(t_);
    out.emplace_back("optim.t", t);
    return out;
}

void Adam::import_state(const std::vector<std::pair<std::string, Tensor>>& tensors) {
    slots_.clear();
    t_ = 0;
    for (const auto& [name, tensor] : tensors) {
        if (name == "optim.t") {
            if (tensor.numel() != 1) throw TrainingError("adam: optim.t must hold one value");
            t_ = static_cast<std::int64_t>(tensor[0]);
        } else if (name.rfind("optim.m.", 0) == 0) {
            slot_for(name.substr(8), tensor.shape()).m = tensor;
        } else if (name.rfind("optim.v.", 0) == 0) {
            slot_for(name.substr(8), tensor.shape()).v = tensor;
        } else {
            throw TrainingError("adam: unrecognized state tensor '" + name + "'");
        }
    }
}

}  // namespace auricle
