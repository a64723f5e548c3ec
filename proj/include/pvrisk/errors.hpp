#ifndef PVRISK_ERRORS_HPP
#define PVRISK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pvrisk {

/// Bad user input: parameters, config keys, malformed data files.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// An explicit time step violates a stability/monotonicity bound.
class stability_error : public std::runtime_error {
public:
    stability_error(const std::string& msg, long required_substeps = 0)
        : std::runtime_error(msg), required_substeps(required_substeps) {}
    long required_substeps;
};

/// The marching scheme produced a non-finite or negative value.
class blowup_error : public std::runtime_error {
public:
    blowup_error(const std::string& msg, long layer, long jx, long ky)
        : std::runtime_error(msg), layer(layer), jx(jx), ky(ky) {}
    long layer, jx, ky;
};

} // namespace pvrisk

#endif
