#pragma once

#include <stdexcept>
#include <string>

namespace hlab {

// Invalid user input / precondition violation. CLI maps this to exit code 1.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A runtime property that the code asserts about its own results was
// violated (energy increased, NaN appeared, ...). CLI maps this to exit 2.
struct property_error : std::runtime_error {
    explicit property_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hlab
