#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semshort/cluster.hpp"
#include "semshort/corpus.hpp"
#include "semshort/error.hpp"
#include "semshort/matrix.hpp"
#include "semshort/topics.hpp"

namespace semshort {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Andrew's monotone chain. Counterclockwise, starting at the lowest-x
/// (then lowest-y) point; collinear boundary points are dropped. One point
/// yields itself, collinear input yields its two extremes.
std::vector<Point2> convex_hull(std::vector<Point2> points);

/// True when `p` is inside or on the counterclockwise polygon `hull` within `tol`.
bool hull_contains(const std::vector<Point2>& hull, Point2 p, double tol = 1e-9);

double polygon_area(const std::vector<Point2>& polygon);

/// Contour (x-mu)^T Sigma^-1 (x-mu) = c.
struct Ellipse {
  Point2 mu;
  double major = 0.0;  // semi-axes, major >= minor > 0
  double minor = 0.0;
  double angle = 0.0;  // of the major axis, in [0, pi)
  double c = 2.0;
  friend bool operator==(const Ellipse&, const Ellipse&) = default;
};

inline constexpr double kDefaultEllipseScale = 2.0;

/// Nullopt when the covariance is singular (collinear or repeated points).
std::optional<Ellipse> ellipse_from_covariance(Point2 mu, double sxx, double sxy, double syy,
                                               double c = kDefaultEllipseScale);

/// Sample mean and covariance (n-1). Nullopt below 3 points or when singular.
std::optional<Ellipse> covariance_ellipse(const std::vector<Point2>& points, double c = kDefaultEllipseScale);

struct ClusterBoundary {
  int topic_id = 0;
  std::vector<Point2> hull;
  std::optional<Ellipse> ellipse;
  friend bool operator==(const ClusterBoundary&, const ClusterBoundary&) = default;
};

std::vector<ClusterBoundary> compute_boundaries(const Matrix& layout2d, const TopicModel& model,
                                                double c = kDefaultEllipseScale, Warnings* warnings = nullptr);

struct ScenePoint {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  std::optional<std::string> factor;
  int topic = -1;
  double prob = 0.0;
  bool selected = false;
  std::string text;
  friend bool operator==(const ScenePoint&, const ScenePoint&) = default;
};

struct Scene {
  std::vector<ScenePoint> points;
  std::vector<ClusterBoundary> boundaries;
  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Points take their topic from `model` (merged topics) and their
/// probability from `assignment`.
Scene build_scene(const Matrix& layout2d, const ItemCorpus& corpus, const TopicModel& model,
                  const ClusterAssignment& assignment, double c = kDefaultEllipseScale, Warnings* warnings = nullptr);

nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

struct SvgOptions {
  int width = 800;
  int height = 600;
  int margin = 40;
};

/// SVG 1.1; identical scenes give identical bytes.
std::string render_svg(const Scene& scene, const SvgOptions& options = {});

}  // namespace semshort
