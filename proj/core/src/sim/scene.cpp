#include "parkocc/sim/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "parkocc/dataset/tagmap.hpp"
#include "parkocc/error.hpp"
#include "parkocc/util/rng.hpp"

namespace parkocc::sim {

namespace {

const Vec3 kCarHalfExtents{2.3, 1.0, 0.8};
constexpr double kStallPitch = 2.6;
constexpr double kClearance = 0.2;

}  // namespace

void SceneConfig::validate() const {
  if (!(lot_width > 0 && lot_length > 0 && ceiling_height > 0)) {
    throw ConfigError("lot dimensions must be positive");
  }
  if (!(pillar_cross_section > 0)) throw ConfigError("pillar_cross_section must be positive");
  if (!(pillar_spacing > pillar_cross_section)) {
    throw ConfigError("pillar_spacing must exceed pillar_cross_section");
  }
  if (!(parked_car_density >= 0.0 && parked_car_density <= 1.0)) {
    throw ConfigError("parked_car_density must lie in [0, 1]");
  }
  if (dynamic_car_count < 0) throw ConfigError("dynamic_car_count must be >= 0");
  if (!(fixed_dt > 0)) throw ConfigError("fixed_dt must be positive");
  if (!(scene_duration > 0)) throw ConfigError("scene_duration must be positive");
  if (!(wall_thickness > 0)) throw ConfigError("wall_thickness must be positive");
  if (!(vehicle_speed >= 0)) throw ConfigError("vehicle_speed must be >= 0");
  if (ceiling_height <= 2.0 * kCarHalfExtents.z()) {
    throw ConfigError("ceiling_height must clear a car (> 1.6 m)");
  }
}

std::string to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::Floor: return "floor";
    case ObjectKind::Ceiling: return "ceiling";
    case ObjectKind::Wall: return "wall";
    case ObjectKind::Pillar: return "pillar";
    case ObjectKind::ParkedCar: return "parked_car";
    case ObjectKind::DynamicCar: return "dynamic_car";
    case ObjectKind::StaticBox: return "static_box";
  }
  return "unknown";
}

int occupancy_rank(ObjectKind k) {
  switch (k) {
    case ObjectKind::Floor: return 1;
    case ObjectKind::Ceiling:
    case ObjectKind::Wall:
    case ObjectKind::Pillar:
    case ObjectKind::StaticBox: return 2;
    case ObjectKind::ParkedCar:
    case ObjectKind::DynamicCar: return 3;
  }
  return 0;
}

// ---------------------------------------------------------------- trajectory

Trajectory::Trajectory(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.empty()) throw Error("simworld", "trajectory needs at least one waypoint");
  for (std::size_t i = 1; i < waypoints_.size(); ++i) {
    if (!(waypoints_[i].time > waypoints_[i - 1].time)) {
      throw Error("simworld", "trajectory times must be strictly increasing");
    }
  }
}

double interpolate_yaw_deg(double a, double b, double f) {
  const double delta = geom::normalize_deg(b - a);
  return geom::normalize_deg(a + f * delta);
}

PoseSE3 Trajectory::pose_at(double t) const {
  if (waypoints_.empty()) throw Error("simworld", "empty trajectory");
  constexpr double kSlack = 1e-9;
  if (t < start_time() - kSlack || t > end_time() + kSlack) {
    throw Error("simworld", "time " + std::to_string(t) + " outside trajectory [" +
                                std::to_string(start_time()) + ", " +
                                std::to_string(end_time()) + "]");
  }
  if (waypoints_.size() == 1 || t <= start_time()) return waypoints_.front().pose;
  if (t >= end_time()) return waypoints_.back().pose;
  const auto it = std::upper_bound(waypoints_.begin(), waypoints_.end(), t,
                                   [](double v, const Waypoint& w) { return v < w.time; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double f = (t - a.time) / (b.time - a.time);
  if (f == 0.0) return a.pose;
  const Vec3 pos = a.pose.translation() + f * (b.pose.translation() - a.pose.translation());
  const double yaw = interpolate_yaw_deg(a.pose.yaw_deg(), b.pose.yaw_deg(), f);
  return PoseSE3::from_yaw(yaw, pos);
}

// ---------------------------------------------------------------- scene model

int SceneModel::add_floor(double z, int tag) {
  SceneObject o;
  o.index = static_cast<int>(objects_.size());
  o.kind = ObjectKind::Floor;
  o.source_tag = tag;
  o.pose = PoseSE3::from_translation(Vec3(0, 0, z));
  objects_.push_back(std::move(o));
  return objects_.back().index;
}

int SceneModel::add_ceiling(double z, int tag) {
  SceneObject o;
  o.index = static_cast<int>(objects_.size());
  o.kind = ObjectKind::Ceiling;
  o.source_tag = tag;
  o.pose = PoseSE3::from_translation(Vec3(0, 0, z));
  objects_.push_back(std::move(o));
  return objects_.back().index;
}

int SceneModel::add_box(ObjectKind kind, int tag, const Vec3& center, const Vec3& half_extents,
                        double yaw_deg) {
  if (!(half_extents.array() > 0.0).all()) {
    throw Error("simworld", "box half extents must be positive");
  }
  SceneObject o;
  o.index = static_cast<int>(objects_.size());
  o.kind = kind;
  o.source_tag = tag;
  o.half_extents = half_extents;
  o.pose = PoseSE3::from_yaw(yaw_deg, center);
  objects_.push_back(std::move(o));
  return objects_.back().index;
}

int SceneModel::add_dynamic_box(int tag, const Vec3& half_extents, Trajectory trajectory) {
  if (!(half_extents.array() > 0.0).all()) {
    throw Error("simworld", "box half extents must be positive");
  }
  SceneObject o;
  o.index = static_cast<int>(objects_.size());
  o.kind = ObjectKind::DynamicCar;
  o.source_tag = tag;
  o.half_extents = half_extents;
  o.pose = trajectory.waypoints().front().pose;
  o.trajectory = std::move(trajectory);
  objects_.push_back(std::move(o));
  return objects_.back().index;
}

const SceneObject& SceneModel::object(int index) const {
  if (!has_object(index)) {
    throw Error("simworld", "unknown object index " + std::to_string(index));
  }
  return objects_[static_cast<std::size_t>(index)];
}

namespace {

Trajectory transform_trajectory(const Trajectory& tr, const PoseSE3& t) {
  if (tr.empty()) return tr;
  std::vector<Waypoint> w;
  w.reserve(tr.waypoints().size());
  for (const auto& p : tr.waypoints()) w.push_back({p.time, geom::pose_compose(t, p.pose)});
  return Trajectory(std::move(w));
}

}  // namespace

SceneModel SceneModel::transformed(const PoseSE3& t) const {
  SceneModel out = *this;
  for (auto& o : out.objects_) {
    if (o.is_plane()) {
      // Planes stay horizontal; only their height moves.
      o.pose = PoseSE3::from_translation(Vec3(0, 0, t.apply(o.pose.translation()).z()));
      continue;
    }
    o.pose = geom::pose_compose(t, o.pose);
    if (o.trajectory) o.trajectory = transform_trajectory(*o.trajectory, t);
  }
  out.ego_trajectory_ = transform_trajectory(ego_trajectory_, t);
  out.bounds_lo_ = Vec3::Constant(-1e9);
  out.bounds_hi_ = Vec3::Constant(1e9);
  return out;
}

SceneModel SceneModel::without(int index) const {
  SceneModel out = *this;
  out.objects_.clear();
  for (const auto& o : objects_) {
    if (o.index == index) continue;
    SceneObject c = o;
    c.index = static_cast<int>(out.objects_.size());
    out.objects_.push_back(std::move(c));
  }
  return out;
}

PoseSE3 object_pose_at(const SceneModel& scene, int object_index, double t) {
  const SceneObject& o = scene.object(object_index);
  if (o.trajectory) return o.trajectory->pose_at(t);
  return o.pose;
}

bool box_contains(const SceneObject& box, const PoseSE3& pose, const Vec3& p, double tol) {
  if (box.is_plane()) {
    const double z0 = pose.translation().z();
    if (box.kind == ObjectKind::Floor) return p.z() <= z0 + tol && p.z() >= z0 - box.slab_thickness - tol;
    return p.z() >= z0 - tol && p.z() <= z0 + box.slab_thickness + tol;
  }
  const Vec3 local = pose.apply_inverse(p);
  return (local.cwiseAbs() - box.half_extents).maxCoeff() <= tol;
}

namespace {

std::array<Eigen::Vector2d, 4> footprint(const SceneObject& o) {
  const Eigen::Vector2d c = o.pose.translation().head<2>();
  const Eigen::Vector2d ax = o.pose.rotation().col(0).head<2>() * o.half_extents.x();
  const Eigen::Vector2d ay = o.pose.rotation().col(1).head<2>() * o.half_extents.y();
  return {c + ax + ay, c - ax + ay, c - ax - ay, c + ax - ay};
}

bool separated_on(const std::array<Eigen::Vector2d, 4>& a, const std::array<Eigen::Vector2d, 4>& b,
                  const Eigen::Vector2d& axis) {
  double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
  for (const auto& p : a) {
    const double d = p.dot(axis);
    amin = std::min(amin, d);
    amax = std::max(amax, d);
  }
  for (const auto& p : b) {
    const double d = p.dot(axis);
    bmin = std::min(bmin, d);
    bmax = std::max(bmax, d);
  }
  constexpr double kTol = 1e-9;
  return amax <= bmin + kTol || bmax <= amin + kTol;
}

}  // namespace

bool boxes_overlap(const SceneObject& a, const SceneObject& b) {
  if (a.is_plane() || b.is_plane()) return false;
  const double az = a.pose.translation().z(), bz = b.pose.translation().z();
  if (az + a.half_extents.z() <= bz - b.half_extents.z() + 1e-9 ||
      bz + b.half_extents.z() <= az - a.half_extents.z() + 1e-9) {
    return false;
  }
  const auto fa = footprint(a);
  const auto fb = footprint(b);
  const std::array<Eigen::Vector2d, 4> axes = {
      a.pose.rotation().col(0).head<2>(), a.pose.rotation().col(1).head<2>(),
      b.pose.rotation().col(0).head<2>(), b.pose.rotation().col(1).head<2>()};
  for (const auto& ax : axes) {
    if (separated_on(fa, fb, ax)) return false;
  }
  return true;
}

// ---------------------------------------------------------------- lot layout

int pillar_count_along(double length, double spacing) {
  // Pillars sit at k * spacing for k >= 1 while a full spacing remains to the far wall.
  const double n = std::floor(length / spacing - 1.0 + 1e-9);
  return n < 0 ? 0 : static_cast<int>(n);
}

namespace {

// Closed clockwise loop around the rectangle [xa, xb] x [ya, yb] with corners
// rounded to `radius`. Starts at (xa, ya + r) heading +y.
class RoundedLoop {
 public:
  RoundedLoop(double xa, double xb, double ya, double yb, double radius)
      : xa_(xa), xb_(xb), ya_(ya), yb_(yb), r_(radius) {
    const double lx = (xb_ - xa_) - 2 * r_;
    const double ly = (yb_ - ya_) - 2 * r_;
    const double arc = 0.5 * geom::kPi * r_;
    lengths_ = {ly, arc, lx, arc, ly, arc, lx, arc};
    perimeter_ = 2 * lx + 2 * ly + 4 * arc;
  }

  double perimeter() const { return perimeter_; }

  PoseSE3 at(double s, double z) const {
    s = std::fmod(s, perimeter_);
    if (s < 0) s += perimeter_;
    std::size_t seg = 0;
    while (seg + 1 < lengths_.size() && s > lengths_[seg]) {
      s -= lengths_[seg];
      ++seg;
    }
    const double r = r_;
    auto arc_pose = [&](double cx, double cy, double phi0_deg, double s_on) {
      const double phi = geom::deg2rad(phi0_deg) - s_on / r;
      const Vec3 p(cx + r * std::cos(phi), cy + r * std::sin(phi), z);
      return PoseSE3::from_yaw(geom::rad2deg(phi) - 90.0, p);
    };
    switch (seg) {
      case 0: return PoseSE3::from_yaw(90.0, Vec3(xa_, ya_ + r + s, z));
      case 1: return arc_pose(xa_ + r, yb_ - r, 180.0, s);
      case 2: return PoseSE3::from_yaw(0.0, Vec3(xa_ + r + s, yb_, z));
      case 3: return arc_pose(xb_ - r, yb_ - r, 90.0, s);
      case 4: return PoseSE3::from_yaw(-90.0, Vec3(xb_, yb_ - r - s, z));
      case 5: return arc_pose(xb_ - r, ya_ + r, 0.0, s);
      case 6: return PoseSE3::from_yaw(180.0, Vec3(xb_ - r - s, ya_, z));
      default: return arc_pose(xa_ + r, ya_ + r, -90.0, s);
    }
  }

 private:
  double xa_, xb_, ya_, yb_, r_;
  std::array<double, 8> lengths_{};
  double perimeter_ = 0.0;
};

Trajectory sample_loop(const RoundedLoop& loop, double s0, double speed, double duration,
                       double dt, double z) {
  const auto steps = static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
  std::vector<Waypoint> w;
  w.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    w.push_back({t, loop.at(s0 + speed * t, z)});
  }
  return Trajectory(std::move(w));
}

}  // namespace

SceneModel build_parking_lot(const SceneConfig& cfg) {
  cfg.validate();
  using dataset::source_tag::kBuilding;
  using dataset::source_tag::kCar;
  using dataset::source_tag::kPole;
  using dataset::source_tag::kRoad;
  using dataset::source_tag::kWall;

  const double W = cfg.lot_width, L = cfg.lot_length, H = cfg.ceiling_height;
  const double s = cfg.pillar_spacing, c = cfg.pillar_cross_section, wt = cfg.wall_thickness;
  const int nx = pillar_count_along(W, s);
  const int ny = pillar_count_along(L, s);

  // Drive aisles are the odd column gaps bounded by pillar columns on both sides.
  std::vector<int> aisles;
  for (int g = 1; g <= nx - 1; g += 2) aisles.push_back(g);
  if (aisles.size() < 2) {
    throw ConfigError("lot_width too small for a two-aisle loop: need at least four pillar "
                      "columns (lot_width >= 5 * pillar_spacing)");
  }
  if (ny < 2) {
    throw ConfigError("lot_length too small: need at least two pillar rows "
                      "(lot_length >= 3 * pillar_spacing)");
  }
  if (s - c < 2.0 * kCarHalfExtents.y() + 2.0 * kClearance) {
    throw ConfigError("pillar_spacing leaves no room for a car between pillars");
  }

  SceneModel scene;
  scene.config = cfg;
  scene.set_bounds(Vec3(0, 0, 0), Vec3(W, L, H));
  util::Rng rng(cfg.seed);

  scene.add_floor(0.0, kRoad);
  scene.add_ceiling(H, kBuilding);

  // Perimeter walls inside the lot footprint; side walls span the full length.
  const double hz = 0.5 * H;
  scene.add_box(ObjectKind::Wall, kWall, Vec3(0.5 * wt, 0.5 * L, hz), Vec3(0.5 * wt, 0.5 * L, hz));
  scene.add_box(ObjectKind::Wall, kWall, Vec3(W - 0.5 * wt, 0.5 * L, hz),
                Vec3(0.5 * wt, 0.5 * L, hz));
  scene.add_box(ObjectKind::Wall, kWall, Vec3(0.5 * W, 0.5 * wt, hz),
                Vec3(0.5 * W - wt, 0.5 * wt, hz));
  scene.add_box(ObjectKind::Wall, kWall, Vec3(0.5 * W, L - 0.5 * wt, hz),
                Vec3(0.5 * W - wt, 0.5 * wt, hz));

  for (int j = 1; j <= ny; ++j) {
    for (int i = 1; i <= nx; ++i) {
      scene.add_box(ObjectKind::Pillar, kPole, Vec3(i * s, j * s, hz),
                    Vec3(0.5 * c, 0.5 * c, hz));
    }
  }

  // Parking stalls: every non-aisle column gap, in the bays between pillar rows.
  struct Slot {
    double x, y;
  };
  std::vector<Slot> slots;
  const double car_len = 2.0 * kCarHalfExtents.x();
  for (int g = 0; g <= nx; ++g) {
    if (std::find(aisles.begin(), aisles.end(), g) != aisles.end()) continue;
    const double left = std::max(g * s, wt) + (g >= 1 ? 0.5 * c : 0.0);
    const double right = std::min((g + 1) * s, W - wt) - (g + 1 <= nx ? 0.5 * c : 0.0);
    if (right - left < car_len + 2.0 * kClearance) continue;
    const double cx = 0.5 * (left + right);
    for (int m = 1; m < ny; ++m) {
      const double lo = m * s + 0.5 * c + kClearance;
      const double hi = (m + 1) * s - 0.5 * c - kClearance;
      const int n = static_cast<int>(std::floor((hi - lo) / kStallPitch + 1e-9));
      const double start = lo + 0.5 * ((hi - lo) - n * kStallPitch);
      for (int k = 0; k < n; ++k) slots.push_back({cx, start + (k + 0.5) * kStallPitch});
    }
  }
  std::vector<std::size_t> order(slots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  const auto n_parked = static_cast<std::size_t>(
      std::llround(cfg.parked_car_density * static_cast<double>(slots.size())));
  std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<long>(n_parked));
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t idx : chosen) {
    scene.add_box(ObjectKind::ParkedCar, kCar,
                  Vec3(slots[idx].x, slots[idx].y, kCarHalfExtents.z()), kCarHalfExtents, 0.0);
  }

  // Nothing static may intersect.
  const auto& objs = scene.objects();
  for (std::size_t a = 0; a < objs.size(); ++a) {
    for (std::size_t b = a + 1; b < objs.size(); ++b) {
      if (boxes_overlap(objs[a], objs[b])) {
        throw ConfigError("static placement overlap between " + to_string(objs[a].kind) + " " +
                          std::to_string(a) + " and " + to_string(objs[b].kind) + " " +
                          std::to_string(b));
      }
    }
  }

  // Loop through two adjacent aisles joined by the cross aisles at both ends.
  const std::size_t pick = static_cast<std::size_t>(rng.below(aisles.size() - 1));
  const double xa = (aisles[pick] + 0.5) * s;
  const double xb = (aisles[pick + 1] + 0.5) * s;
  const double ya = 0.5 * (wt + (s - 0.5 * c));
  const double yb = 0.5 * ((ny * s + 0.5 * c) + (L - wt));
  const double radius = std::min({3.0, 0.45 * (xb - xa), 0.45 * (yb - ya)});
  const RoundedLoop loop(xa, xb, ya, yb, radius);
  const double s0 = rng.uniform(0.0, loop.perimeter());

  const int n_dyn = cfg.dynamic_car_count;
  const double gap = loop.perimeter() / (n_dyn + 1);
  if (n_dyn > 0 && gap < car_len + 3.0) {
    throw ConfigError("dynamic_car_count too large: vehicles on the loop would be closer than "
                      "one car length plus 3 m");
  }
  scene.set_ego_trajectory(
      sample_loop(loop, s0, cfg.vehicle_speed, cfg.scene_duration, cfg.fixed_dt, 0.0));
  for (int k = 1; k <= n_dyn; ++k) {
    scene.add_dynamic_box(kCar, kCarHalfExtents,
                          sample_loop(loop, s0 + k * gap, cfg.vehicle_speed, cfg.scene_duration,
                                      cfg.fixed_dt, kCarHalfExtents.z()));
  }
  return scene;
}

}  // namespace parkocc::sim
