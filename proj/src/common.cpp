#include "rdd/common.hpp"

#include <thread>

#include "rdd/parallel.hpp"

namespace rdd {

std::string_view to_string(UeClass c) noexcept {
    switch (c) {
        case UeClass::Drone: return "drone";
        case UeClass::IndoorGround: return "indoor";
        case UeClass::OutdoorGround: return "outdoor";
    }
    return "unknown";
}

UeClass parse_ue_class(std::string_view s) {
    if (s == "drone") return UeClass::Drone;
    if (s == "indoor") return UeClass::IndoorGround;
    if (s == "outdoor") return UeClass::OutdoorGround;
    throw Error("unknown UE class '" + std::string(s) + "'");
}

unsigned default_thread_count() noexcept {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace rdd
