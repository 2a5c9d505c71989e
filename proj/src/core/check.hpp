#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace graphae {

[[noreturn]] inline void fail_check(const char* expr, const char* file, int line,
                                    const std::string& msg) {
    std::ostringstream os;
    os << file << ":" << line << ": check failed (" << expr << ")";
    if (!msg.empty()) os << ": " << msg;
    throw std::runtime_error(os.str());
}

}  // namespace graphae

#define GA_CHECK(cond, msg)                                          \
    do {                                                             \
        if (!(cond)) ::graphae::fail_check(#cond, __FILE__, __LINE__, (msg)); \
    } while (0)
