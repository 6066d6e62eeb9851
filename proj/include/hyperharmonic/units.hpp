#pragma once

#include <atomic>
#include <cmath>

namespace hyperharmonic {

/// Unit of every entropy-derived quantity. Bits unless switched globally.
enum class LogBase { bits, nats };

namespace detail {
inline std::atomic<LogBase>& log_base_storage()
{
    static std::atomic<LogBase> base{LogBase::bits};
    return base;
}
}  // namespace detail

inline void set_log_base(LogBase base) { detail::log_base_storage().store(base); }
inline LogBase log_base() { return detail::log_base_storage().load(); }

/// Logarithm in the active information unit.
inline double info_log(double x)
{
    return log_base() == LogBase::bits ? std::log2(x) : std::log(x);
}

/// RAII switch of the global unit, restored on scope exit.
class ScopedLogBase {
public:
    explicit ScopedLogBase(LogBase base) : previous_(log_base()) { set_log_base(base); }
    ~ScopedLogBase() { set_log_base(previous_); }
    ScopedLogBase(const ScopedLogBase&) = delete;
    ScopedLogBase& operator=(const ScopedLogBase&) = delete;

private:
    LogBase previous_;
};

}  // namespace hyperharmonic
