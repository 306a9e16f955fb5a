#pragma once

#include <functional>
#include <iostream>
#include <string>

namespace s2lpp {

using WarnHandler = std::function<void(const std::string&)>;

/// Process-wide warning sink. Tests swap it out to assert on warnings;
/// the default writes to stderr.
inline WarnHandler& warn_handler() {
    static WarnHandler handler = [](const std::string& msg) {
        std::cerr << "warning: " << msg << std::endl;
    };
    return handler;
}

inline void warn(const std::string& msg) {
    if (warn_handler()) warn_handler()(msg);
}

}  // namespace s2lpp
