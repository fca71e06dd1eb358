#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "auricle/tensor.hpp"

namespace auricle {

struct AdamConfig {
    float lr = 1e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;  // added outside the square root
};

// Adam with bias correction, float32 throughout. Moment buffers are keyed by
// parameter name so they can ride along in checkpoints and survive loads in
// any order.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    const AdamConfig& config() const { return cfg_; }
    std::int64_t steps() const { return t_; }

    // params and grads are parallel lists; moments are created on first
    // sight of a name. A non-finite gradient aborts with the offending
    // parameter named.
    void step(const std::vector<std::pair<std::string, Tensor*>>& params,
              const std::vector<std::pair<std::string, Tensor*>>& grads);

    // Checkpoint plumbing: moments as "optim.m.<param>" / "optim.v.<param>"
    // plus a single-element "optim.t".
    std::vector<std::pair<std::string, Tensor>> export_state() const;
    void import_state(const std::vector<std::pair<std::string, Tensor>>& tensors);

private:
    struct Slot {
        std::string name;
        Tensor m;
        Tensor v;
    };
    Slot& slot_for(const std::string& name, const std::vector<std::int64_t>& shape);

    AdamConfig cfg_;
    std::vector<Slot> slots_;
    std::int64_t t_ = 0;
};

}  // namespace auricle
