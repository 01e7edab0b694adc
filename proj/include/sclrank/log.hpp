#pragma once

#include <atomic>
#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sclrank::log {

enum class Level { quiet = 0, warn = 1, info = 2 };

namespace detail {

struct State {
    std::mutex mutex;
    Level level = Level::warn;
    std::function<void(Level, std::string_view)> sink;
    std::atomic<std::size_t> warnings{0};
};

inline State& state()
{
    static State s;
    return s;
}

inline void emit(Level level, std::string_view msg)
{
    auto& s = state();
    std::lock_guard lock(s.mutex);
    if (s.sink) {
        s.sink(level, msg);
        return;
    }
    if (static_cast<int>(level) <= static_cast<int>(s.level)) {
        std::cerr << (level == Level::warn ? "warning: " : "") << msg << '\n';
    }
}

} // namespace detail

inline void set_level(Level level)
{
    std::lock_guard lock(detail::state().mutex);
    detail::state().level = level;
}

/// Replace the stderr writer; pass an empty function to restore it.
inline void set_sink(std::function<void(Level, std::string_view)> sink)
{
    std::lock_guard lock(detail::state().mutex);
    detail::state().sink = std::move(sink);
}

inline void warn(std::string_view msg)
{
    detail::state().warnings.fetch_add(1, std::memory_order_relaxed);
    detail::emit(Level::warn, msg);
}

inline void info(std::string_view msg) { detail::emit(Level::info, msg); }

/// Total warnings emitted by this process so far.
inline std::size_t warning_count() { return detail::state().warnings.load(); }

/// Collects messages for the lifetime of the object. Used by tests.
class Capture {
public:
    Capture()
    {
        set_sink([this](Level, std::string_view m) { messages.emplace_back(m); });
    }
    ~Capture() { set_sink({}); }
    Capture(Capture const&) = delete;
    Capture& operator=(Capture const&) = delete;

    std::vector<std::string> messages;
};

} // namespace sclrank::log
