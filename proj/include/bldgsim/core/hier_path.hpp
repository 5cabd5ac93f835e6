#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace bldgsim::core {

// Cluster is the top of the hierarchy, Component the bottom.
enum class HierLevel { Component = 0, SystemOrBuilding = 1, Domain = 2, Cluster = 3 };

std::string_view to_string(HierLevel level);

/// Address of a module or signal in the cluster/domain/system/component tree.
///
/// System and component ids are unique inside a cluster. A system may
/// register modules under several domains (a building has thermal,
/// electrical and water parts), so subtree membership below the domain
/// level is decided by system id rather than by the domain segment.
class HierPath {
public:
    HierPath() = default;

    /// Throws InvalidArgument when a later segment is set without the earlier
    /// ones, when an id is empty or contains '/' or '.', or when the domain is
    /// not one of thermal, electrical, water.
    HierPath(std::string cluster, std::optional<std::string> domain = std::nullopt,
             std::optional<std::string> system = std::nullopt,
             std::optional<std::string> component = std::nullopt);

    /// Parses "cluster[/domain[/system[/component]]]".
    static HierPath parse(std::string_view text);

    const std::string& cluster() const noexcept { return cluster_; }
    const std::optional<std::string>& domain() const noexcept { return domain_; }
    const std::optional<std::string>& system() const noexcept { return system_; }
    const std::optional<std::string>& component() const noexcept { return component_; }

    HierLevel level() const noexcept;

    /// True when `other` lies in the subtree rooted here (including itself).
    bool contains(const HierPath& other) const noexcept;

    HierPath parent() const;
    HierPath child(std::string id) const;

    std::string str() const;               // slash separated
    std::string dotted() const;            // dot separated, used for CSV columns

    auto operator<=>(const HierPath&) const = default;
    bool operator==(const HierPath&) const = default;

private:
    std::string cluster_;
    std::optional<std::string> domain_;
    std::optional<std::string> system_;
    std::optional<std::string> component_;
};

bool is_known_domain(std::string_view domain);

} // namespace bldgsim::core
