#pragma once

#include <optional>
#include <string_view>
#include <variant>

namespace syncsim {

/// Ratio quorum with capped, delayed retries.
struct TimeRedundant {
    double sync_degree = 0.7;
    double lambda_s = 20.0;
    int max_retries = 2;
};

/// Cluster quorum. Clusters with fewer than `min_cluster_size` present members
/// are not formed; every formed cluster must keep `required_per_cluster`
/// available members for the quorum to pass.
struct ComponentRedundant {
    int min_cluster_size = 3;
    int required_per_cluster = 1;
};

struct Barrier {
    std::optional<double> timeout_s;  // default: 10x the segment mean
};

struct TimeSlotted {
    double slot_multiplier = 1.5;
    double sync_degree = 0.7;
};

using SyncPolicy = std::variant<TimeRedundant, ComponentRedundant, Barrier, TimeSlotted>;

enum class UpdateScheme { AllWorker, PublishSubscribe };

/// Throws ValidationError on out-of-range parameters.
void validate(const SyncPolicy& policy);

std::string_view policy_name(const SyncPolicy& policy) noexcept;
std::string_view to_string(UpdateScheme scheme) noexcept;
UpdateScheme update_scheme_from_string(std::string_view s);

}  // namespace syncsim
