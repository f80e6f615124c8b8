#pragma once

#include <string>

#include <json.hpp>

namespace histofeat {

// Line-delimited JSON events on stderr. Key order is sorted by the json
// object itself, so identical events serialize identically.
void log_event(const std::string& event, nlohmann::json fields = nlohmann::json::object());

// Silences log output (used by tests).
void set_log_enabled(bool enabled);

}  // namespace histofeat
