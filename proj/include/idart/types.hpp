#pragma once

#include <cstdint>

namespace idart {

// Milliseconds since the simulation epoch. All timing in the system is
// integer milliseconds; there is no wall-clock anywhere.
using Instant = std::int64_t;

using NodeId = std::uint16_t;

inline constexpr NodeId kDoorNode = 0x0001;
inline constexpr NodeId kPerimeterNode = 0x0002;
inline constexpr NodeId kGatewayNode = 0x0100;

}  // namespace idart
