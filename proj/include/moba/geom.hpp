#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace moba {

struct Vec2 {
  float x = 0.0f;
  float y = 0.0f;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(float s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;
};

inline float dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline float length_sq(Vec2 a) { return dot(a, a); }
inline float length(Vec2 a) { return std::sqrt(length_sq(a)); }
inline float dist(Vec2 a, Vec2 b) { return length(a - b); }
inline float dist_sq(Vec2 a, Vec2 b) { return length_sq(a - b); }

inline Vec2 normalized(Vec2 a) {
  float len = length(a);
  if (len <= 0.0f) return {0.0f, 0.0f};
  return {a.x / len, a.y / len};
}

// Axis-aligned rectangle, closed on all edges.
struct Rect {
  float x0 = 0.0f, y0 = 0.0f, x1 = 0.0f, y1 = 0.0f;

  bool contains(Vec2 p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
  bool operator==(const Rect&) const = default;
};

// Distance from p to the segment [a, b].
inline float dist_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  float denom = length_sq(ab);
  if (denom <= 0.0f) return dist(p, a);
  float t = std::clamp(dot(p - a, ab) / denom, 0.0f, 1.0f);
  return dist(p, a + ab * t);
}

// Distance from p to a polyline given as consecutive waypoints.
inline float dist_to_polyline(Vec2 p, const std::vector<Vec2>& pts) {
  if (pts.empty()) return std::numeric_limits<float>::infinity();
  if (pts.size() == 1) return dist(p, pts[0]);
  float best = std::numeric_limits<float>::infinity();
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    best = std::min(best, dist_to_segment(p, pts[i], pts[i + 1]));
  }
  return best;
}

// Point at arclength s along a polyline, clamped to the endpoints.
inline Vec2 point_along_polyline(const std::vector<Vec2>& pts, float s) {
  if (pts.empty()) return {};
  if (s <= 0.0f) return pts.front();
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    float seg = dist(pts[i], pts[i + 1]);
    if (s <= seg && seg > 0.0f) {
      return pts[i] + (pts[i + 1] - pts[i]) * (s / seg);
    }
    s -= seg;
  }
  return pts.back();
}

inline float polyline_length(const std::vector<Vec2>& pts) {
  float total = 0.0f;
  for (size_t i = 0; i + 1 < pts.size(); ++i) total += dist(pts[i], pts[i + 1]);
  return total;
}

// Distance from p to a capsule around segment [a, b] of half-width w is
// dist_to_segment(p,a,b) <= w; used for lane corridors and line skills.
inline bool in_capsule(Vec2 p, Vec2 a, Vec2 b, float halfwidth) {
  return dist_to_segment(p, a, b) <= halfwidth;
}

}  // namespace moba
