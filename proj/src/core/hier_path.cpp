#include "bldgsim/core/hier_path.hpp"

#include <vector>

#include "bldgsim/core/error.hpp"

namespace bldgsim::core {

namespace {

void check_id(const std::string& id, const char* what) {
    if (id.empty()) {
        throw InvalidArgument(std::string("malformed path: empty ") + what + " id");
    }
    if (id.find_first_of("/. \t") != std::string::npos) {
        throw InvalidArgument("malformed path: " + std::string(what) + " id '" + id +
                              "' contains a separator or whitespace");
    }
}

} // namespace

std::string_view to_string(HierLevel level) {
    switch (level) {
    case HierLevel::Cluster: return "cluster";
    case HierLevel::Domain: return "domain";
    case HierLevel::SystemOrBuilding: return "system";
    case HierLevel::Component: return "component";
    }
    return "?";
}

bool is_known_domain(std::string_view domain) {
    return domain == "thermal" || domain == "electrical" || domain == "water";
}

HierPath::HierPath(std::string cluster, std::optional<std::string> domain,
                   std::optional<std::string> system, std::optional<std::string> component)
    : cluster_(std::move(cluster)), domain_(std::move(domain)), system_(std::move(system)),
      component_(std::move(component)) {
    check_id(cluster_, "cluster");
    if (component_ && !system_) {
        throw InvalidArgument("malformed path: component set without system");
    }
    if (system_ && !domain_) {
        throw InvalidArgument("malformed path: system set without domain");
    }
    if (domain_) {
        check_id(*domain_, "domain");
        if (!is_known_domain(*domain_)) {
            throw InvalidArgument("malformed path: unknown domain '" + *domain_ + "'");
        }
    }
    if (system_) check_id(*system_, "system");
    if (component_) check_id(*component_, "component");
}

HierPath HierPath::parse(std::string_view text) {
    std::vector<std::string> parts;
    std::size_t begin = 0;
    while (true) {
        auto end = text.find('/', begin);
        parts.emplace_back(text.substr(begin, end == std::string_view::npos ? end : end - begin));
        if (end == std::string_view::npos) break;
        begin = end + 1;
    }
    if (parts.size() > 4) {
        throw InvalidArgument("malformed path '" + std::string(text) + "': more than 4 segments");
    }
    auto at = [&](std::size_t i) -> std::optional<std::string> {
        if (i < parts.size()) return parts[i];
        return std::nullopt;
    };
    return HierPath(parts[0], at(1), at(2), at(3));
}

HierLevel HierPath::level() const noexcept {
    if (component_) return HierLevel::Component;
    if (system_) return HierLevel::SystemOrBuilding;
    if (domain_) return HierLevel::Domain;
    return HierLevel::Cluster;
}

bool HierPath::contains(const HierPath& other) const noexcept {
    if (cluster_ != other.cluster_) return false;
    switch (level()) {
    case HierLevel::Cluster:
        return true;
    case HierLevel::Domain:
        return other.domain_ == domain_;
    case HierLevel::SystemOrBuilding:
        return other.system_ == system_;
    case HierLevel::Component:
        return other.system_ == system_ && other.component_ == component_;
    }
    return false;
}

HierPath HierPath::parent() const {
    HierPath p = *this;
    if (p.component_) p.component_.reset();
    else if (p.system_) p.system_.reset();
    else if (p.domain_) p.domain_.reset();
    return p;
}

HierPath HierPath::child(std::string id) const {
    switch (level()) {
    case HierLevel::Cluster: return HierPath(cluster_, std::move(id));
    case HierLevel::Domain: return HierPath(cluster_, domain_, std::move(id));
    case HierLevel::SystemOrBuilding: return HierPath(cluster_, domain_, system_, std::move(id));
    case HierLevel::Component: break;
    }
    throw InvalidArgument("component path " + str() + " has no children");
}

std::string HierPath::str() const {
    std::string s = cluster_;
    for (const auto* seg : {&domain_, &system_, &component_}) {
        if (*seg) {
            s += '/';
            s += **seg;
        }
    }
    return s;
}

std::string HierPath::dotted() const {
    std::string s = str();
    for (char& c : s) {
        if (c == '/') c = '.';
    }
    return s;
}

} // namespace bldgsim::core
