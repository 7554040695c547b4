#include "parkocc/dataset/tagmap.hpp"

#include <algorithm>
#include <string>

#include "parkocc/error.hpp"

namespace parkocc::dataset {

namespace {

// Category names are kept exactly as tabulated, including the spellings
// "mamade", "pedestrain" and "motocycle".
constexpr std::array<MappedTag, 31> kTable = {{
    {0, "noise"},                      // 0 unlabeled
    {24, "flat.driveable_surface"},    // 1 road
    {26, "flat.sidewalk"},             // 2 sidewalk
    {28, "static.mamade"},             // 3 building
    {28, "static.mamade"},             // 4 wall
    {28, "static.mamade"},             // 5 fence
    {28, "static.mamade"},             // 6 pole
    {28, "static.mamade"},             // 7 traffic light
    {28, "static.mamade"},             // 8 traffic sign
    {30, "static.vegetation"},         // 9 vegetation
    {27, "flat.terrain"},              // 10 terrain
    {0, "noise"},                      // 11 sky
    {2, "human.pedestrain.adult"},     // 12 pedestrian
    {14, "vehicle.bicycle"},           // 13 rider
    {17, "vehicle.car"},               // 14 car
    {23, "vehicle.truck"},             // 15 truck
    {16, "vehicle.bus.rigid"},         // 16 bus
    {15, "vehicle.bus.rigid"},         // 17 train
    {21, "vehicle.motocycle"},         // 18 motorcycle
    {14, "vehicle.bicycle"},           // 19 bicycle
    {29, "static.other"},              // 20 static
    {9, "movable_object.barrier"},     // 21 dynamic
    {29, "static.other"},              // 22 other
    {29, "static.other"},              // 23 water
    {24, "flat.driveable_surface"},    // 24 road line
    {24, "flat.driveable_surface"},    // 25 ground
    {29, "static.other"},              // 26 bridge
    {29, "static.other"},              // 27 rail
    {29, "static.other"},              // 28 guard rail
    {24, "flat.driveable_surface"},    // 29 parking lane
    {24, "flat.driveable_surface"},    // 30 parking area
}};

constexpr std::array<std::uint8_t, 15> kImage = {0,  2,  9,  14, 15, 16, 17, 21,
                                                 23, 24, 26, 27, 28, 29, 30};

}  // namespace

MappedTag map_semantic_tag(int tag) {
  if (tag < 0 || tag > source_tag::kMax) {
    throw ConfigError("semantic tag out of range 0..30: " + std::to_string(tag));
  }
  return kTable[static_cast<std::size_t>(tag)];
}

std::span<const std::uint8_t> nuscenes_tag_set() { return kImage; }

bool is_nuscenes_tag(std::uint8_t tag) {
  return std::binary_search(kImage.begin(), kImage.end(), tag);
}

std::string_view category_name(std::uint8_t nuscenes_tag) {
  // Rows sharing a tag also share the category name.
  for (const auto& row : kTable) {
    if (row.nuscenes_tag == nuscenes_tag) return row.category_name;
  }
  throw ConfigError("not a mapped nuScenes tag: " + std::to_string(nuscenes_tag));
}

}  // namespace parkocc::dataset
