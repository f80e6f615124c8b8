#include "histofeat/logging.hpp"

#include <cstdio>
#include <mutex>

namespace histofeat {

namespace {
bool g_enabled = true;
std::mutex g_mutex;
}  // namespace

void log_event(const std::string& event, nlohmann::json fields) {
    if (!g_enabled) return;
    fields["event"] = event;
    std::lock_guard<std::mutex> lock(g_mutex);
    std::fputs(fields.dump().c_str(), stderr);
    std::fputc('\n', stderr);
}

void set_log_enabled(bool enabled) { g_enabled = enabled; }

}  // namespace histofeat
