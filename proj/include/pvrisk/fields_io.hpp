#ifndef PVRISK_FIELDS_IO_HPP
#define PVRISK_FIELDS_IO_HPP

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "pvrisk/errors.hpp"
#include "pvrisk/grid.hpp"

namespace pvrisk {

// Native-endian binary dump of solved fields, for feeding a later simulate
// run without re-solving. Not an interchange format.

namespace detail {
constexpr char kFieldsMagic[8] = {'P', 'V', 'R', 'F', 'L', 'D', '0', '1'};

inline void put_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
inline double get_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
} // namespace detail

inline void write_fields_dump(std::ostream& os, const SolutionFields& f) {
    os.write(detail::kFieldsMagic, sizeof detail::kFieldsMagic);
    detail::put_u64(os, static_cast<std::uint64_t>(f.grid.nt));
    detail::put_u64(os, static_cast<std::uint64_t>(f.grid.nx));
    detail::put_u64(os, static_cast<std::uint64_t>(f.grid.ny));
    detail::put_f64(os, f.grid.horizon);
    detail::put_f64(os, f.grid.capacity);
    detail::put_f64(os, f.grid.t_start);
    detail::put_u64(os, f.gradient == GradientScheme::godunov ? 0 : 1);
    detail::put_u64(os, f.layers.size());
    for (long l : f.layers) detail::put_u64(os, static_cast<std::uint64_t>(l));
    for (double t : f.times) detail::put_f64(os, t);
    auto put_field = [&](const std::vector<std::vector<double>>& field) {
        for (const auto& slice : field)
            os.write(reinterpret_cast<const char*>(slice.data()),
                     static_cast<std::streamsize>(slice.size() * sizeof(double)));
    };
    put_field(f.psi);
    put_field(f.u_star);
    put_field(f.phi_star);
}

inline SolutionFields read_fields_dump(std::istream& is) {
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::string(magic, 8) != std::string(detail::kFieldsMagic, 8))
        throw validation_error("fields dump: bad magic (not a fields file)");
    SolutionFields f;
    f.grid.nt = static_cast<long>(detail::get_u64(is));
    f.grid.nx = static_cast<int>(detail::get_u64(is));
    f.grid.ny = static_cast<int>(detail::get_u64(is));
    f.grid.horizon = detail::get_f64(is);
    f.grid.capacity = detail::get_f64(is);
    f.grid.t_start = detail::get_f64(is);
    f.gradient = detail::get_u64(is) == 0 ? GradientScheme::godunov : GradientScheme::central;
    const std::uint64_t n = detail::get_u64(is);
    if (!is || n == 0 || n > (1u << 24))
        throw validation_error("fields dump: corrupt slice count");
    f.layers.resize(n);
    f.times.resize(n);
    for (auto& l : f.layers) l = static_cast<long>(detail::get_u64(is));
    for (auto& t : f.times) t = detail::get_f64(is);
    const std::size_t nv = static_cast<std::size_t>(f.grid.nx + 1) * (f.grid.ny + 1);
    auto get_field = [&](std::vector<std::vector<double>>& field) {
        field.assign(n, std::vector<double>(nv));
        for (auto& slice : field)
            is.read(reinterpret_cast<char*>(slice.data()),
                    static_cast<std::streamsize>(nv * sizeof(double)));
    };
    get_field(f.psi);
    get_field(f.u_star);
    get_field(f.phi_star);
    if (!is) throw validation_error("fields dump: truncated file");
    return f;
}

inline void write_fields_dump_file(const std::string& path, const SolutionFields& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw validation_error("cannot open '" + path + "' for writing");
    write_fields_dump(os, f);
}

inline SolutionFields read_fields_dump_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw validation_error("cannot open fields dump '" + path + "'");
    return read_fields_dump(is);
}

} // namespace pvrisk

#endif
