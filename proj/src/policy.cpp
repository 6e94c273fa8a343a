#include "syncsim/policy.hpp"

#include <string>

#include "syncsim/errors.hpp"

namespace syncsim {

namespace {

void check_degree(double d) {
    if (!(d > 0.0 && d <= 1.0)) throw ValidationError("sync_degree", "must lie in (0, 1]");
}

struct Validator {
    void operator()(const TimeRedundant& p) const {
        check_degree(p.sync_degree);
        if (!(p.lambda_s > 0.0)) throw ValidationError("lambda_s", "must be positive");
        if (p.max_retries < 0) throw ValidationError("max_retries", "must be non-negative");
    }
    void operator()(const ComponentRedundant& p) const {
        if (p.min_cluster_size < 1) throw ValidationError("min_cluster_size", "must be at least 1");
        if (p.required_per_cluster < 1) throw ValidationError("required_per_cluster", "must be at least 1");
    }
    void operator()(const Barrier& p) const {
        if (p.timeout_s && !(*p.timeout_s > 0.0)) throw ValidationError("barrier_timeout_s", "must be positive");
    }
    void operator()(const TimeSlotted& p) const {
        check_degree(p.sync_degree);
        if (!(p.slot_multiplier >= 0.0)) throw ValidationError("slot_multiplier", "must be non-negative");
    }
};

}  // namespace

void validate(const SyncPolicy& policy) { std::visit(Validator{}, policy); }

std::string_view policy_name(const SyncPolicy& policy) noexcept {
    switch (policy.index()) {
        case 0: return "time_redundant";
        case 1: return "component_redundant";
        case 2: return "barrier";
        default: return "time_slotted";
    }
}

std::string_view to_string(UpdateScheme scheme) noexcept {
    return scheme == UpdateScheme::AllWorker ? "all_worker" : "publish_subscribe";
}

UpdateScheme update_scheme_from_string(std::string_view s) {
    if (s == "all_worker") return UpdateScheme::AllWorker;
    if (s == "publish_subscribe") return UpdateScheme::PublishSubscribe;
    throw ValidationError("update_scheme", "expected all_worker or publish_subscribe, got '" + std::string(s) + "'");
}

}  // namespace syncsim
