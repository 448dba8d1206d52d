// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "suturekit/needle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "suturekit/errors.hpp"

namespace suturekit {

void NeedleShape::validate() const {
  if (!(radius > 0.0) || !(arc_angle > 0.0) || !(arc_angle <= 2.0 * kPi - 1e-6)) {
    throw Error(ErrorCode::kInvalidArgument, "needle needs radius > 0 and arc angle in (0, 2pi)");
  }
}

double NeedleShape::chordLength() const { return 2.0 * radius * std::sin(0.5 * arc_angle); }

Vec3 NeedleShape::localPoint(double s) const {
  const double phi = s - 0.5 * arc_angle;
  return {radius * std::cos(phi), radius * std::sin(phi), 0.0};
}

Vec3 NeedleShape::localTipTangent() const {
  const double half = 0.5 * arc_angle;
  return {-std::sin(half), -std::cos(half), 0.0};
}

Vec3 arcPoint(const RigidPose& needle_pose, const NeedleShape& shape, double s) {
  return needle_pose.apply(shape.localPoint(s));
}

NeedleParams::Vector NeedleParams::toVector() const {
  Vector v;
  v << theta1, theta2, kp_st.x(), kp_st.y(), kp_ed.x(), kp_ed.y();
  return v;
}

NeedleParams NeedleParams::fromVector(const Vector& v) {
  return {v(0), v(1), Vec2(v(2), v(3)), Vec2(v(4), v(5))};
}

RayFrame keypointRays(const PinholeCamera& anchor, const Vec2& kp_st, const Vec2& kp_ed) {
  RayFrame rays;
  rays.origin = anchor.center();
  rays.d_st = anchor.backprojectRay(kp_st);
  rays.d_ed = anchor.backprojectRay(kp_ed);
  rays.alpha = std::atan2(rays.d_st.cross(rays.d_ed).norm(), rays.d_st.dot(rays.d_ed));
  if (!(rays.alpha > 1e-6)) {
    throw Error(ErrorCode::kDegenerateRays, "keypoint rays are parallel");
  }
  return rays;
}

std::array<double, 2> endpointDepths(double alpha, double theta1, double chord_length) {
  // Law of sines in the triangle (camera, start, end): the angle at the start
  // point is theta1, at the camera alpha, at the end point pi - alpha - theta1.
  const double k = chord_length / std::sin(alpha);
  return {k * std::sin(alpha + theta1), k * std::sin(theta1)};
}

namespace {

// Unit vector perpendicular to the chord, inside the rays plane, pointing away
// from the camera; plus the completing axis chord x inplane.
struct ChordFrame {
  Vec3 chord;
  Vec3 inplane;
  Vec3 normal;
};

ChordFrame chordFrame(const Vec3& origin, const Vec3& p_st, const Vec3& p_ed) {
  ChordFrame f;
  f.chord = (p_ed - p_st).normalized();
  const Vec3 mid = 0.5 * (p_st + p_ed) - origin;
  f.inplane = (mid - mid.dot(f.chord) * f.chord).normalized();
  f.normal = f.chord.cross(f.inplane);
  return f;
}

}  // namespace

RigidPose paramsToPose(const NeedleParams& x, const NeedleShape& shape, const PinholeCamera& anchor) {
  const RayFrame rays = keypointRays(anchor, x.kp_st, x.kp_ed);
  if (!(x.theta1 > 0.0) || !(x.theta1 < kPi - rays.alpha)) {
    throw Error(ErrorCode::kThetaOutOfRange, "theta1 must lie in (0, pi - alpha)");
  }
  const double chord = shape.chordLength();
  const auto [t_st, t_ed] = endpointDepths(rays.alpha, x.theta1, chord);
  const Vec3 p_st = rays.origin + t_st * rays.d_st;
  const Vec3 p_ed = rays.origin + t_ed * rays.d_ed;

  const ChordFrame f = chordFrame(rays.origin, p_st, p_ed);
  const Vec3 bulge = std::cos(x.theta2) * f.inplane + std::sin(x.theta2) * f.normal;

  Mat3 r;
  r.col(0) = bulge;
  r.col(1) = f.chord;
  r.col(2) = bulge.cross(f.chord);
  const Vec3 center = 0.5 * (p_st + p_ed) - shape.radius * std::cos(0.5 * shape.arc_angle) * bulge;
  return RigidPose(r, center);
}

NeedleParams poseToParams(const RigidPose& needle_pose, const NeedleShape& shape,
                          const PinholeCamera& anchor) {
  const Vec3 p_st = arcPoint(needle_pose, shape, 0.0);
  const Vec3 p_ed = arcPoint(needle_pose, shape, shape.arc_angle);
  NeedleParams x;
  x.kp_st = anchor.project(p_st);
  x.kp_ed = anchor.project(p_ed);

  const Vec3 c = anchor.center();
  const Vec3 to_cam = c - p_st;
  const Vec3 along = p_ed - p_st;
  x.theta1 = std::atan2(to_cam.cross(along).norm(), to_cam.dot(along));

  const ChordFrame f = chordFrame(c, p_st, p_ed);
  const Vec3 bulge = needle_pose.rotation().col(0);
  double theta2 = std::atan2(bulge.dot(f.normal), bulge.dot(f.inplane));
  if (theta2 < 0.0) theta2 += 2.0 * kPi;
  if (theta2 >= 2.0 * kPi) theta2 -= 2.0 * kPi;
  x.theta2 = theta2;
  return x;
}

std::vector<Vec3> sampleAxisPoints(const RigidPose& needle_pose, const NeedleShape& shape, int count,
                                   const std::optional<ArcInterval>& occlusion) {
  if (count < 2) throw Error(ErrorCode::kInvalidArgument, "axis sample count must be >= 2");
  std::vector<Vec3> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double fraction = static_cast<double>(i) / (count - 1);
    if (occlusion && occlusion->contains(fraction)) continue;
    points.push_back(arcPoint(needle_pose, shape, fraction * shape.arc_angle));
  }
  return points;
}

std::vector<Vec2> projectVisible(const PinholeCamera& camera, const std::vector<Vec3>& points) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const Vec3& p : points) {
    const Vec3 pc = camera.toCamera(p);
    if (pc.z() > 1e-12) out.push_back(camera.projectCameraPoint(pc));
  }
  return out;
}

StereoPoints reproject(const RigidPose& needle_pose, const NeedleShape& shape, const StereoRig& rig,
                       int count) {
  const std::vector<Vec3> points = sampleAxisPoints(needle_pose, shape, count);
  return {projectVisible(rig.left, points), projectVisible(rig.right, points)};
}

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kInvalidArgument, "mask size must be positive");
}

BinaryMask::BinaryMask(int width, int height, std::vector<Pixel> foreground)
    : BinaryMask(width, height) {
  std::vector<unsigned char> seen(static_cast<std::size_t>(width) * height, 0);
  for (const Pixel& p : foreground) {
    if (p.u < 0 || p.v < 0 || p.u >= width || p.v >= height) {
      throw Error(ErrorCode::kInvalidArgument, "mask pixel outside the image");
    }
    auto& flag = seen[static_cast<std::size_t>(p.v) * width + p.u];
    if (flag) throw Error(ErrorCode::kInvalidArgument, "duplicate mask pixel");
    flag = 1;
  }
  foreground_ = std::move(foreground);
}

std::vector<unsigned char> BinaryMask::raster() const {
  std::vector<unsigned char> img(static_cast<std::size_t>(width_) * height_, 0);
  for (const Pixel& p : foreground_) img[static_cast<std::size_t>(p.v) * width_ + p.u] = 255;
  return img;
}

namespace {

double segmentDistanceSq(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).squaredNorm();
}

void stampSegment(std::vector<unsigned char>& grid, int width, int height, const Vec2& a,
                  const Vec2& b, double radius) {
  // Clamp in floating point first; far off-screen projections overflow int.
  const auto lo = [](double x, int limit) {
    return static_cast<int>(std::clamp(std::ceil(x), 0.0, static_cast<double>(limit)));
  };
  const auto hi = [](double x, int limit) {
    return static_cast<int>(std::clamp(std::floor(x), -1.0, static_cast<double>(limit - 1)));
  };
  const int u0 = lo(std::min(a.x(), b.x()) - radius, width);
  const int u1 = hi(std::max(a.x(), b.x()) + radius, width);
  const int v0 = lo(std::min(a.y(), b.y()) - radius, height);
  const int v1 = hi(std::max(a.y(), b.y()) + radius, height);
  const double r2 = radius * radius;
  for (int v = v0; v <= v1; ++v) {
    for (int u = u0; u <= u1; ++u) {
      if (segmentDistanceSq(Vec2(u, v), a, b) <= r2) {
        grid[static_cast<std::size_t>(v) * width + u] = 1;
      }
    }
  }
}

}  // namespace

BinaryMask rasterize(const RigidPose& needle_pose, const NeedleShape& shape,
                     const PinholeCamera& camera, double line_width,
                     const std::optional<ArcInterval>& occlusion) {
  if (!(line_width >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "line width must be >= 1 px");

  // Sample density comes from the unoccluded arc so that occlusion only ever
  // removes samples.
  constexpr int kCoarse = 64;
  double projected_length = 0.0;
  std::optional<Vec2> prev;
  for (int i = 0; i <= kCoarse; ++i) {
    const Vec3 pc = camera.toCamera(arcPoint(needle_pose, shape, shape.arc_angle * i / kCoarse));
    if (pc.z() > 1e-12) {
      const Vec2 px = camera.projectCameraPoint(pc);
      if (prev) projected_length += (px - *prev).norm();
      prev = px;
    } else {
      prev.reset();
    }
  }
  // Cap keeps a nearly-grazing arc from exploding the sample count.
  const int samples =
      static_cast<int>(std::clamp(std::ceil(4.0 * projected_length) + 1.0, 2.0, 1.0e6));

  std::vector<unsigned char> grid(static_cast<std::size_t>(camera.width()) * camera.height(), 0);
  const double radius = 0.5 * line_width;
  std::optional<Vec2> last;
  for (int i = 0; i < samples; ++i) {
    const double fraction = static_cast<double>(i) / (samples - 1);
    std::optional<Vec2> cur;
    if (!(occlusion && occlusion->contains(fraction))) {
      const Vec3 pc = camera.toCamera(arcPoint(needle_pose, shape, fraction * shape.arc_angle));
      if (pc.z() > 1e-12) cur = camera.projectCameraPoint(pc);
    }
    if (cur) {
      stampSegment(grid, camera.width(), camera.height(), last ? *last : *cur, *cur, radius);
    }
    last = cur;
  }

  std::vector<Pixel> fg;
  for (int v = 0; v < camera.height(); ++v) {
    for (int u = 0; u < camera.width(); ++u) {
      if (grid[static_cast<std::size_t>(v) * camera.width() + u]) fg.push_back({u, v});
    }
  }
  return BinaryMask(camera.width(), camera.height(), std::move(fg));
}

void writePgm(const BinaryMask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path);
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  const auto img = mask.raster();
  out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace suturekit
