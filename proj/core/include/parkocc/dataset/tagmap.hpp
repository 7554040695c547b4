#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace parkocc::dataset {

/// Simulator (CARLA-style) semantic tags the scene model uses.
namespace source_tag {
inline constexpr int kUnlabeled = 0;
inline constexpr int kRoad = 1;
inline constexpr int kBuilding = 3;
inline constexpr int kWall = 4;
inline constexpr int kPole = 6;
inline constexpr int kCar = 14;
inline constexpr int kMax = 30;
}  // namespace source_tag

/// nuScenes lidarseg tags that appear on our data.
namespace nusc_tag {
inline constexpr std::uint8_t kNoise = 0;
inline constexpr std::uint8_t kCar = 17;
inline constexpr std::uint8_t kDriveable = 24;
inline constexpr std::uint8_t kManmade = 28;
}  // namespace nusc_tag

struct MappedTag {
  std::uint8_t nuscenes_tag;
  std::string_view category_name;
};

/// Exact lookup of the 31-row simulator -> nuScenes table. Throws
/// ConfigError for tags outside 0..30.
MappedTag map_semantic_tag(int source_tag);

/// The 15 distinct nuScenes tags in the table's image, ascending.
std::span<const std::uint8_t> nuscenes_tag_set();

bool is_nuscenes_tag(std::uint8_t tag);

/// Category name of a nuScenes tag in the image, e.g. 17 -> "vehicle.car".
std::string_view category_name(std::uint8_t nuscenes_tag);

}  // namespace parkocc::dataset
