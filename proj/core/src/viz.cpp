#include "semshort/viz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <fmt/format.h>

namespace semshort {

namespace {

double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

constexpr const char* kFactorPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                          "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};
constexpr const char* kTopicPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3",
                                         "#937860", "#da8bc3", "#8c8c8c", "#ccb974", "#64b5cd"};
constexpr const char* kNoFactorColor = "#9e9e9e";

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

nlohmann::json point_json(Point2 p) { return nlohmann::json::array({p.x, p.y}); }

}  // namespace

std::vector<Point2> convex_hull(std::vector<Point2> points) {
  if (points.empty()) throw Error(ErrorCode::invalid_input, "convex_hull needs at least one point");
  std::sort(points.begin(), points.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;

  std::vector<Point2> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool hull_contains(const std::vector<Point2>& hull, Point2 p, double tol) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return std::hypot(p.x - hull[0].x, p.y - hull[0].y) <= tol;
  if (hull.size() == 2) {
    const Point2 a = hull[0], b = hull[1];
    const double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
    const double t = std::clamp(((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / len2, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * (b.x - a.x)), p.y - (a.y + t * (b.y - a.y))) <= tol;
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2 a = hull[i], b = hull[(i + 1) % hull.size()];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (cross(a, b, p) / len < -tol) return false;
  }
  return true;
}

double polygon_area(const std::vector<Point2>& polygon) {
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point2 a = polygon[i], b = polygon[(i + 1) % polygon.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::abs(twice) / 2.0;
}

std::optional<Ellipse> ellipse_from_covariance(Point2 mu, double sxx, double sxy, double syy, double c) {
  if (!(c > 0.0)) throw Error(ErrorCode::invalid_config, "ellipse scale must be positive", "config.ellipse_c");
  const double mean = (sxx + syy) / 2.0;
  const double half_gap = std::hypot((sxx - syy) / 2.0, sxy);
  const double l1 = mean + half_gap, l2 = mean - half_gap;
  const double scale = std::max(std::abs(sxx) + std::abs(syy), std::numeric_limits<double>::min());
  if (!(l2 > 1e-12 * scale)) return std::nullopt;
  double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  if (angle < 0.0) angle += std::numbers::pi;
  if (angle >= std::numbers::pi) angle -= std::numbers::pi;
  return Ellipse{mu, std::sqrt(c * l1), std::sqrt(c * l2), angle, c};
}

std::optional<Ellipse> covariance_ellipse(const std::vector<Point2>& points, double c) {
  if (points.size() < 3) return std::nullopt;
  const double n = static_cast<double>(points.size());
  Point2 mu;
  for (const auto& p : points) {
    mu.x += p.x;
    mu.y += p.y;
  }
  mu.x /= n;
  mu.y /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    sxx += (p.x - mu.x) * (p.x - mu.x);
    sxy += (p.x - mu.x) * (p.y - mu.y);
    syy += (p.y - mu.y) * (p.y - mu.y);
  }
  return ellipse_from_covariance(mu, sxx / (n - 1.0), sxy / (n - 1.0), syy / (n - 1.0), c);
}

std::vector<ClusterBoundary> compute_boundaries(const Matrix& layout2d, const TopicModel& model, double c,
                                                Warnings* warnings) {
  if (layout2d.cols() != 2) throw Error(ErrorCode::invalid_input, "boundaries need a 2D layout");
  std::vector<ClusterBoundary> out;
  for (const auto& topic : model.topics) {
    std::vector<Point2> pts;
    for (int id : topic.member_ids) {
      const auto r = static_cast<std::size_t>(id - 1);
      pts.push_back({layout2d(r, 0), layout2d(r, 1)});
    }
    ClusterBoundary b{topic.topic_id, convex_hull(pts), covariance_ellipse(pts, c)};
    if (!b.ellipse && warnings) {
      warnings->push_back(fmt::format("viz: topic {} has a singular covariance; drawing the hull only", topic.topic_id));
    }
    out.push_back(std::move(b));
  }
  return out;
}

Scene build_scene(const Matrix& layout2d, const ItemCorpus& corpus, const TopicModel& model,
                  const ClusterAssignment& assignment, double c, Warnings* warnings) {
  if (layout2d.rows() != corpus.size() || assignment.labels.size() != corpus.size()) {
    throw Error(ErrorCode::invalid_input, "scene inputs disagree on the item count");
  }
  std::vector<int> topic_of(corpus.size(), -1);
  for (const auto& topic : model.topics)
    for (int id : topic.member_ids) topic_of[static_cast<std::size_t>(id - 1)] = topic.topic_id;
  const auto selected = model.selected_ids();
  const std::set<int> chosen(selected.begin(), selected.end());

  Scene scene;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& item = corpus.items[i];
    scene.points.push_back({item.id, layout2d(i, 0), layout2d(i, 1), item.factor_label, topic_of[i],
                            assignment.probabilities[i], chosen.contains(item.id), item.text});
  }
  scene.boundaries = compute_boundaries(layout2d, model, c, warnings);
  return scene;
}

nlohmann::json scene_to_json(const Scene& scene) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : scene.points) {
    points.push_back({{"id", p.id},
                      {"x", p.x},
                      {"y", p.y},
                      {"factor", p.factor ? nlohmann::json(*p.factor) : nlohmann::json(nullptr)},
                      {"topic", p.topic},
                      {"prob", p.prob},
                      {"selected", p.selected},
                      {"text", p.text}});
  }
  nlohmann::json hulls = nlohmann::json::array(), ellipses = nlohmann::json::array();
  for (const auto& b : scene.boundaries) {
    nlohmann::json vertices = nlohmann::json::array();
    for (const auto& v : b.hull) vertices.push_back(point_json(v));
    hulls.push_back({{"topic", b.topic_id}, {"vertices", vertices}});
    if (b.ellipse) {
      const auto& e = *b.ellipse;
      ellipses.push_back({{"topic", b.topic_id},
                          {"mu", point_json(e.mu)},
                          {"axes", {e.major, e.minor}},
                          {"angle", e.angle},
                          {"c", e.c}});
    }
  }
  return {{"points", points}, {"hulls", hulls}, {"ellipses", ellipses}};
}

Scene scene_from_json(const nlohmann::json& j) {
  Scene scene;
  for (const auto& p : j.at("points")) {
    ScenePoint sp;
    sp.id = p.at("id").get<int>();
    sp.x = p.at("x").get<double>();
    sp.y = p.at("y").get<double>();
    if (!p.at("factor").is_null()) sp.factor = p.at("factor").get<std::string>();
    sp.topic = p.at("topic").get<int>();
    sp.prob = p.at("prob").get<double>();
    sp.selected = p.at("selected").get<bool>();
    sp.text = p.value("text", "");
    scene.points.push_back(std::move(sp));
  }
  for (const auto& h : j.at("hulls")) {
    ClusterBoundary b;
    b.topic_id = h.at("topic").get<int>();
    for (const auto& v : h.at("vertices")) b.hull.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    for (const auto& e : j.at("ellipses")) {
      if (e.at("topic").get<int>() != b.topic_id) continue;
      b.ellipse = Ellipse{{e.at("mu").at(0).get<double>(), e.at("mu").at(1).get<double>()},
                          e.at("axes").at(0).get<double>(),
                          e.at("axes").at(1).get<double>(),
                          e.at("angle").get<double>(),
                          e.at("c").get<double>()};
    }
    scene.boundaries.push_back(std::move(b));
  }
  return scene;
}

std::string render_svg(const Scene& scene, const SvgOptions& options) {
  double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
  if (!scene.points.empty()) {
    min_x = max_x = scene.points.front().x;
    min_y = max_y = scene.points.front().y;
  }
  const auto extend = [&](double x, double y) {
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
    min_y = std::min(min_y, y);
    max_y = std::max(max_y, y);
  };
  for (const auto& p : scene.points) extend(p.x, p.y);
  for (const auto& b : scene.boundaries) {
    if (!b.ellipse) continue;
    const auto& e = *b.ellipse;
    extend(e.mu.x - e.major, e.mu.y - e.major);
    extend(e.mu.x + e.major, e.mu.y + e.major);
  }
  const double span_x = std::max(max_x - min_x, 1e-9), span_y = std::max(max_y - min_y, 1e-9);
  const double inner_w = options.width - 2.0 * options.margin, inner_h = options.height - 2.0 * options.margin;
  const double scale = std::min(inner_w / span_x, inner_h / span_y);
  const double off_x = options.margin + (inner_w - span_x * scale) / 2.0;
  const double off_y = options.margin + (inner_h - span_y * scale) / 2.0;
  // Screen y grows downward.
  const auto sx = [&](double x) { return off_x + (x - min_x) * scale; };
  const auto sy = [&](double y) { return off_y + (max_y - y) * scale; };

  std::set<std::string> factor_names;
  for (const auto& p : scene.points)
    if (p.factor) factor_names.insert(*p.factor);
  const auto factor_color = [&](const std::optional<std::string>& f) -> std::string {
    if (!f) return kNoFactorColor;
    const auto idx = static_cast<std::size_t>(std::distance(factor_names.begin(), factor_names.find(*f)));
    return kFactorPalette[idx % std::size(kFactorPalette)];
  };
  const auto topic_color = [](int topic) {
    return kTopicPalette[static_cast<std::size_t>(topic) % std::size(kTopicPalette)];
  };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n",
      options.width, options.height);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", options.width,
                     options.height);

  out += "<g id=\"hulls\">\n";
  for (const auto& b : scene.boundaries) {
    std::string pts;
    for (const auto& v : b.hull) pts += fmt::format("{}{:.3f},{:.3f}", pts.empty() ? "" : " ", sx(v.x), sy(v.y));
    out += fmt::format(
        "<polygon data-topic=\"{}\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.08\" stroke=\"{}\" "
        "stroke-width=\"1.5\"/>\n",
        b.topic_id, pts, topic_color(b.topic_id), topic_color(b.topic_id));
  }
  out += "</g>\n<g id=\"ellipses\">\n";
  for (const auto& b : scene.boundaries) {
    if (!b.ellipse) continue;
    const auto& e = *b.ellipse;
    const double cx = sx(e.mu.x), cy = sy(e.mu.y);
    out += fmt::format(
        "<ellipse data-topic=\"{}\" cx=\"{:.3f}\" cy=\"{:.3f}\" rx=\"{:.3f}\" ry=\"{:.3f}\" "
        "transform=\"rotate({:.3f} {:.3f} {:.3f})\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"/>\n",
        b.topic_id, cx, cy, e.major * scale, e.minor * scale, -e.angle * 180.0 / std::numbers::pi, cx, cy,
        topic_color(b.topic_id));
  }
  out += "</g>\n<g id=\"points\">\n";
  for (const auto& p : scene.points) {
    const double cx = sx(p.x), cy = sy(p.y);
    out += fmt::format("<circle data-id=\"{}\" data-topic=\"{}\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"5\" fill=\"{}\"/>\n",
                       p.id, p.topic, cx, cy, factor_color(p.factor));
    if (p.selected) {
      out += fmt::format(
          "<circle class=\"selected\" data-id=\"{}\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"9\" fill=\"none\" "
          "stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"3,2\"/>\n",
          p.id, cx, cy);
    }
    out += fmt::format("<text x=\"{:.3f}\" y=\"{:.3f}\" font-family=\"sans-serif\" font-size=\"10\">Q{}</text>\n",
                       cx + 7.0, cy - 7.0, p.id);
  }
  out += "</g>\n<g id=\"legend\">\n";
  int row = 0;
  for (const auto& name : factor_names) {
    const double y = options.margin / 2.0 + 14.0 * row;
    out += fmt::format("<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"4\" fill=\"{}\"/>\n", 12.0, y, factor_color(name));
    out += fmt::format("<text x=\"20\" y=\"{:.3f}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>\n", y + 3.0,
                       xml_escape(name));
    ++row;
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace semshort
