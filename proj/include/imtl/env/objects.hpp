#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace imtl::env {

/// One of the six object configurations on the table.
struct ObjectConfig {
    std::size_t id;
    std::string_view name;
    double rollability;   // alpha in [0, 1]; scales how far the object moves
    bool topple_prone;
    bool stable_base;     // can carry another object
    double rest_height;   // z of the centre of mass at rest, metres
};

inline constexpr std::size_t kObjectCount = 6;

/// Stand-in constants for the synthetic generators (not measured values).
inline constexpr std::array<ObjectConfig, kObjectCount> kObjects{{
    {0, "sphere", 1.0, false, false, 0.03},
    {1, "cube", 0.2, false, true, 0.03},
    {2, "h-prism", 0.3, false, false, 0.03},
    {3, "v-prism", 0.25, true, true, 0.06},
    {4, "h-cylinder", 0.8, false, false, 0.03},
    {5, "v-cylinder", 0.3, true, true, 0.09},
}};

/// Objects that roll away when placed on top of something.
constexpr bool rolls(std::size_t id) {
    return id == 0 || id == 4;
}

/// A stack holds when the base can carry an object and the picked one does not roll.
constexpr bool stable_pair(std::size_t picked, std::size_t target) {
    return kObjects[target].stable_base && !rolls(picked);
}

}  // namespace imtl::env
