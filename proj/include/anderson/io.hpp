#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "potential.hpp"

namespace anderson {

/// 17 significant digits: enough to round-trip any double.
inline std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string potential_to_json(const SingleSitePotential& p)
{
    auto list = [](const std::vector<double>& xs) {
        std::string s = "[";
        for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + format_double(xs[i]);
        return s + "]";
    };
    return "{\"breakpoints\": " + list(p.breakpoints()) + ", \"values\": " + list(p.values()) + "}";
}

inline SingleSitePotential potential_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("breakpoints") || !j.contains("values"))
        throw Error(ErrorCode::InvalidArgument, "potential JSON needs \"breakpoints\" and \"values\"");
    try {
        return validate(j.at("breakpoints").get<std::vector<double>>(), j.at("values").get<std::vector<double>>());
    }
    catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad potential JSON: ") + e.what());
    }
}

inline SingleSitePotential read_potential(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open potential file " + path);
    nlohmann::json j;
    try {
        in >> j;
    }
    catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, path + ": " + e.what());
    }
    return potential_from_json(j);
}

inline void write_potential(const std::string& path, const SingleSitePotential& p)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
    out << potential_to_json(p) << '\n';
}

/// 64-bit FNV-1a, used to fingerprint the input potential in run manifests.
inline std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string potential_hash(const SingleSitePotential& p)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(potential_to_json(p))));
    return std::string("fnv1a64:") + buf;
}

} // namespace anderson
