#include <doctest.h>

#include <cmath>
#include <numbers>

#include "semshort/viz.hpp"
#include "support.hpp"

using namespace semshort;

namespace {

double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool in_triangle(Point2 p, Point2 a, Point2 b, Point2 c, double tol) {
  const double d1 = cross(a, b, p), d2 = cross(b, c, p), d3 = cross(c, a, p);
  const bool neg = d1 < -tol || d2 < -tol || d3 < -tol;
  const bool pos = d1 > tol || d2 > tol || d3 > tol;
  return !(neg && pos);
}

/// A point lies in the convex hull iff it lies in a triangle of input points.
bool oracle_inside(const std::vector<Point2>& pts, Point2 p, double tol = 1e-9) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      for (std::size_t k = j + 1; k < pts.size(); ++k)
        if (in_triangle(p, pts[i], pts[j], pts[k], tol)) return true;
  return false;
}

/// Extreme points: those outside every triangle of the remaining points.
std::size_t oracle_vertex_count(const std::vector<Point2>& pts) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<Point2> rest;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) rest.push_back(pts[j]);
    if (!oracle_inside(rest, pts[i], 0.0)) ++n;
  }
  return n;
}

ItemCorpus small_corpus(std::size_t n) {
  ItemCorpus corpus;
  for (std::size_t i = 0; i < n; ++i) {
    Item item;
    item.id = static_cast<int>(i) + 1;
    item.text = "item <" + std::to_string(i + 1) + "> & co";
    item.factor_label = i < n / 2 ? "A" : "B&C";
    corpus.items.push_back(item);
  }
  return corpus;
}

}  // namespace

TEST_CASE("convex hull of a square with interior and collinear points") {
  const auto hull = convex_hull({{0, 0}, {1, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}, {0, 1}, {2, 2}});
  CHECK(hull == std::vector<Point2>{{0, 0}, {2, 0}, {2, 2}, {0, 2}});
  CHECK(polygon_area(hull) == doctest::Approx(4.0));
  CHECK(hull_contains(hull, {1, 1}));
  CHECK(hull_contains(hull, {2, 1}));
  CHECK_FALSE(hull_contains(hull, {2.1, 1}));
}

TEST_CASE("degenerate hulls") {
  CHECK_THROWS_AS(convex_hull({}), Error);
  CHECK(convex_hull({{1, 1}}) == std::vector<Point2>{{1, 1}});
  CHECK(convex_hull({{1, 1}, {1, 1}}) == std::vector<Point2>{{1, 1}});
  CHECK(convex_hull({{0, 0}, {1, 1}, {2, 2}, {3, 3}}) == std::vector<Point2>{{0, 0}, {3, 3}});
  CHECK(hull_contains({{0, 0}, {3, 3}}, {1.5, 1.5}));
  CHECK_FALSE(hull_contains({{0, 0}, {3, 3}}, {1.5, 1.6}));
  CHECK(hull_contains({{1, 1}}, {1, 1}));
}

TEST_CASE("hull agrees with the triangle oracle on random clusters") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.below(18);
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back({rng.normal(), rng.normal()});
    const auto hull = convex_hull(pts);
    for (const auto& p : pts) CHECK(hull_contains(hull, p, 1e-9));
    CHECK(hull.size() == oracle_vertex_count(pts));
    CHECK(polygon_area(hull) > 0.0);
    for (int q = 0; q < 10; ++q) {
      const Point2 probe{rng.uniform(-3, 3), rng.uniform(-3, 3)};
      CHECK(hull_contains(hull, probe, 0.0) == oracle_inside(pts, probe, 0.0));
    }
  }
}

TEST_CASE("ellipse from covariance") {
  const auto e = ellipse_from_covariance({1, 2}, 4, 0, 1, 1.0);
  REQUIRE(e);
  CHECK(std::abs(e->major - 2.0) < 1e-9);
  CHECK(std::abs(e->minor - 1.0) < 1e-9);
  CHECK(e->angle == 0.0);
  CHECK(e->mu == Point2{1, 2});

  const auto scaled = ellipse_from_covariance({0, 0}, 4, 0, 1, 2.0);
  CHECK(scaled->major == doctest::Approx(2.0 * std::sqrt(2.0)));

  const auto tall = ellipse_from_covariance({0, 0}, 1, 0, 4, 1.0);
  CHECK(tall->angle == doctest::Approx(std::numbers::pi / 2));

  // Rotating diag(4, 1) by 30 degrees.
  const double t = std::numbers::pi / 6, c = std::cos(t), s = std::sin(t);
  const auto rotated = ellipse_from_covariance({0, 0}, 4 * c * c + s * s, 3 * c * s, 4 * s * s + c * c, 1.0);
  CHECK(std::abs(rotated->major - 2.0) < 1e-9);
  CHECK(std::abs(rotated->minor - 1.0) < 1e-9);
  CHECK(rotated->angle == doctest::Approx(t));

  const auto negative = ellipse_from_covariance({0, 0}, 4 * c * c + s * s, -3 * c * s, 4 * s * s + c * c, 1.0);
  CHECK(negative->angle == doctest::Approx(std::numbers::pi - t));

  CHECK_FALSE(ellipse_from_covariance({0, 0}, 1, 1, 1));
  CHECK_FALSE(ellipse_from_covariance({0, 0}, 0, 0, 0));
}

TEST_CASE("sample covariance ellipse") {
  CHECK_FALSE(covariance_ellipse({{0, 0}, {1, 1}}));
  CHECK_FALSE(covariance_ellipse({{0, 0}, {1, 1}, {2, 2}}));
  // Var x = 2, var y = 0.5 (n-1), no covariance.
  const auto e = covariance_ellipse({{-1, -0.5}, {1, -0.5}, {-1, 0.5}, {1, 0.5}}, 1.0);
  REQUIRE(e);
  CHECK(e->major == doctest::Approx(std::sqrt(4.0 / 3.0)));
  CHECK(e->minor == doctest::Approx(std::sqrt(1.0 / 3.0)));
  CHECK(e->mu == Point2{0, 0});
}

TEST_CASE("scene, JSON round trip and SVG") {
  const auto corpus = small_corpus(8);
  const auto layout = testing::blobs({{0, 0}, {6, 6}}, 4, 0.5, 3);
  ClusterAssignment assignment;
  assignment.labels = {0, 0, 0, 0, 1, 1, 1, -1};
  assignment.probabilities = {1, 0.9, 0.8, 1, 1, 1, 0.7, 0};
  assignment.stabilities = {1, 1};
  TopicModel model;
  model.topics = {Topic{0, {1, 2, 3, 4}, {}, {}, {{1, 1.0, false}, {4, 1.0, false}}},
                  Topic{1, {5, 6, 7}, {}, {}, {{5, 1.0, false}}}};
  model.outliers = {8};

  Warnings warnings;
  const auto scene = build_scene(layout, corpus, model, assignment, 2.0, &warnings);
  REQUIRE(scene.points.size() == 8);
  CHECK(scene.points[0].selected);
  CHECK_FALSE(scene.points[1].selected);
  CHECK(scene.points[7].topic == -1);
  CHECK(scene.points[4].topic == 1);
  CHECK(scene.points[6].prob == 0.7);
  CHECK(scene.points[0].factor == "A");
  REQUIRE(scene.boundaries.size() == 2);
  for (const auto& b : scene.boundaries) {
    const auto& topic = model.topics[static_cast<std::size_t>(b.topic_id)];
    for (int id : topic.member_ids) {
      const auto& p = scene.points[static_cast<std::size_t>(id - 1)];
      CHECK(hull_contains(b.hull, {p.x, p.y}));
    }
    CHECK(b.ellipse.has_value());
  }

  const auto back = scene_from_json(nlohmann::json::parse(scene_to_json(scene).dump()));
  CHECK(back == scene);

  const auto svg = render_svg(scene);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  CHECK(svg.find(">B&amp;C<") != std::string::npos);
  CHECK(svg.find("Q1") != std::string::npos);
  CHECK(render_svg(back) == svg);
  CHECK(render_svg(scene) == svg);

  CHECK_THROWS_AS(build_scene(Matrix(3, 2), corpus, model, assignment), Error);
}

TEST_CASE("singular cluster covariance gives a hull without ellipse") {
  const auto corpus = small_corpus(4);
  const auto layout = Matrix::from_rows({{0, 0}, {1, 1}, {2, 2}, {5, 0}});
  ClusterAssignment assignment;
  assignment.labels = {0, 0, 0, -1};
  assignment.probabilities = {1, 1, 1, 0};
  assignment.stabilities = {1};
  TopicModel model;
  model.topics = {Topic{0, {1, 2, 3}, {}, {}, {}}};
  Warnings warnings;
  const auto bounds = compute_boundaries(layout, model, 2.0, &warnings);
  REQUIRE(bounds.size() == 1);
  CHECK_FALSE(bounds[0].ellipse);
  CHECK(bounds[0].hull.size() == 2);
  CHECK(warnings.size() == 1);
}
