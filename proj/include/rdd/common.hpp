#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rdd {

// Base error for everything the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or usage. The CLI maps this to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// File system failures, always carrying the offending path.
class IoError : public Error {
public:
    IoError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class UeClass : std::uint8_t { Drone = 0, IndoorGround = 1, OutdoorGround = 2 };

inline constexpr int kUeClassCount = 3;

std::string_view to_string(UeClass c) noexcept;
UeClass parse_ue_class(std::string_view s);

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

}  // namespace rdd
