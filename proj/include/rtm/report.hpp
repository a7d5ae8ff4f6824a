#pragma once

#include "rtm/multiclass.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rtm {

struct RunReport {
    std::map<std::string, std::string> config;
    std::uint64_t seed = 0;
    std::vector<std::string> labels;
    Metrics metrics;
    std::size_t feature_width = 0;
    std::size_t clauses = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    double wall_seconds = 0.0;
};

inline nlohmann::json to_json(const RunReport& r) {
    nlohmann::json j;
    j["config"] = r.config;
    j["seed"] = r.seed;
    j["labels"] = r.labels;
    j["accuracy"] = r.metrics.accuracy;
    j["f_macro"] = r.metrics.f_macro;
    j["f_micro"] = r.metrics.f_micro;
    j["confusion"] = r.metrics.confusion;
    j["feature_width"] = r.feature_width;
    j["clauses"] = r.clauses;
    j["train_size"] = r.train_size;
    j["test_size"] = r.test_size;
    j["wall_seconds"] = r.wall_seconds;
    return j;
}

} // namespace rtm
