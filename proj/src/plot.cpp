// SPDX-License-Identifier: Apache-2.0

#include "mpcert/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mpcert {

namespace {

using Polygon = std::vector<Point2>;

double Area(const Polygon& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point2& u = p[i];
    const Point2& v = p[(i + 1) % p.size()];
    a += u.first * v.second - v.first * u.second;
  }
  return 0.5 * std::abs(a);
}

// Keeps the part where f <= 0. Crossings on edges are found by bisection so
// the same routine serves affine and quadratic constraints.
Polygon Clip(const Polygon& poly, const std::function<double(const Point2&)>& f) {
  Polygon out;
  const std::size_t n = poly.size();
  auto crossing = [&f](Point2 a, Point2 b) {
    double fa = f(a);
    for (int it = 0; it < 60; ++it) {
      const Point2 m{0.5 * (a.first + b.first), 0.5 * (a.second + b.second)};
      const double fm = f(m);
      if ((fm <= 0.0) == (fa <= 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    return Point2{0.5 * (a.first + b.first), 0.5 * (a.second + b.second)};
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& cur = poly[i];
    const Point2& nxt = poly[(i + 1) % n];
    const bool in_cur = f(cur) <= 0.0;
    const bool in_nxt = f(nxt) <= 0.0;
    if (in_cur) out.push_back(cur);
    if (in_cur != in_nxt) out.push_back(crossing(cur, nxt));
  }
  // Crossings found at a vertex duplicate it.
  Polygon dedup;
  auto same = [](const Point2& a, const Point2& b) {
    return std::abs(a.first - b.first) + std::abs(a.second - b.second) <=
           1e-12 * (1.0 + std::abs(a.first) + std::abs(a.second));
  };
  for (const Point2& p : out) {
    if (dedup.empty() || !same(dedup.back(), p)) dedup.push_back(p);
  }
  while (dedup.size() > 1 && same(dedup.front(), dedup.back())) dedup.pop_back();
  return dedup;
}

Polygon Refine(const Polygon& poly, int times) {
  Polygon p = poly;
  for (int t = 0; t < times; ++t) {
    Polygon q;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Point2& u = p[i];
      const Point2& v = p[(i + 1) % p.size()];
      q.push_back(u);
      q.push_back({0.5 * (u.first + v.first), 0.5 * (u.second + v.second)});
    }
    p = std::move(q);
  }
  return p;
}

std::string Color(double t) {
  // Blue to yellow.
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(68 + t * (253 - 68)));
  const int g = static_cast<int>(std::lround(1 + t * (231 - 1)));
  const int b = static_cast<int>(std::lround(84 + t * (37 - 84)));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<Point2> SlicePolygon(const Region& region, const Box& box, int ax, int ay,
                                 const Vector& anchor, int refine) {
  auto lift = [&](const Point2& p) {
    Vector theta = anchor;
    theta(ax) = p.first;
    theta(ay) = p.second;
    return theta;
  };
  Polygon poly{{box.lower(ax), box.lower(ay)},
               {box.upper(ax), box.lower(ay)},
               {box.upper(ax), box.upper(ay)},
               {box.lower(ax), box.upper(ay)}};
  for (int k = 0; k < region.num_affine() && !poly.empty(); ++k) {
    const AffineFunction g = region.Affine(k);
    poly = Clip(poly, [&](const Point2& p) { return g(lift(p)); });
  }
  for (const QuadraticFunction& q : region.quadratic()) {
    if (poly.empty()) break;
    poly = Clip(Refine(poly, refine), [&](const Point2& p) { return q(lift(p)); });
  }
  const double scale = (box.upper(ax) - box.lower(ax)) * (box.upper(ay) - box.lower(ay));
  if (poly.size() < 3 || Area(poly) <= 1e-12 * scale) return {};
  return poly;
}

std::string SliceSvg(const MpProblem& problem, const CertPartition& partition,
                     const SliceOptions& options, int* polygons) {
  const int d = problem.theta_dim();
  if (d < 2) throw std::invalid_argument("slice plot needs at least two parameters");
  if (options.ax < 0 || options.ax >= d || options.ay < 0 || options.ay >= d ||
      options.ax == options.ay) {
    throw std::invalid_argument("slice axes must be two distinct parameter indices");
  }
  const Box& box = problem.theta0;
  Vector anchor = options.anchor.size() == 0 ? Vector(0.5 * (box.lower + box.upper)) : options.anchor;
  if (anchor.size() != d) throw std::invalid_argument("slice anchor has wrong length");

  int lo = std::numeric_limits<int>::max(), hi = 0;
  for (const RegionTuple& t : partition.regions) {
    const int v = options.color_by_nodes ? t.kappa_node : t.kappa_iter;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double W = options.width, H = options.width;
  const double x0 = box.lower(options.ax), x1 = box.upper(options.ax);
  const double y0 = box.lower(options.ay), y1 = box.upper(options.ay);
  auto sx = [&](double x) { return 40.0 + (x - x0) / (x1 - x0) * (W - 80.0); };
  auto sy = [&](double y) { return H - 40.0 - (y - y0) / (y1 - y0) * (H - 80.0); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  os << "<title>partition slice, axes " << options.ax << " and " << options.ay << ", colored by "
     << (options.color_by_nodes ? "node count" : "iteration count") << " in [" << lo << ", "
     << hi << "]</title>\n";
  int count = 0;
  for (const RegionTuple& t : partition.regions) {
    const std::vector<Point2> poly = SlicePolygon(t.region, box, options.ax, options.ay, anchor);
    if (poly.empty()) continue;
    ++count;
    const int v = options.color_by_nodes ? t.kappa_node : t.kappa_iter;
    os << "<polygon class=\"region\" data-kappa-iter=\"" << t.kappa_iter
       << "\" data-kappa-node=\"" << t.kappa_node << "\" fill=\""
       << Color(hi > lo ? static_cast<double>(v - lo) / (hi - lo) : 0.5)
       << "\" stroke=\"#222\" stroke-width=\"0.3\" points=\"";
    for (const Point2& p : poly) os << sx(p.first) << ',' << sy(p.second) << ' ';
    os << "\"/>\n";
  }
  os << "<rect x=\"40\" y=\"40\" width=\"" << W - 80 << "\" height=\"" << H - 80
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">theta_"
     << options.ax << "</text>\n";
  os << "<text x=\"12\" y=\"" << H / 2 << "\" transform=\"rotate(-90 12 " << H / 2
     << ")\" text-anchor=\"middle\">theta_" << options.ay << "</text>\n";
  os << "</svg>\n";
  if (polygons) *polygons = count;
  return os.str();
}

std::string LineChartSvg(const std::string& title, const std::string& x_label,
                         const std::string& y_label, const std::vector<Series>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = 0.0, y1 = -x0;
  for (const Series& s : series) {
    for (const Point2& p : s.points) {
      x0 = std::min(x0, p.first);
      x1 = std::max(x1, p.first);
      y0 = std::min(y0, p.second);
      y1 = std::max(y1, p.second);
    }
  }
  if (!(x1 > x0)) {
    x0 = std::isfinite(x0) ? x0 - 1.0 : 0.0;
    x1 = x0 + 2.0;
  }
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double W = 640, H = 420, L = 60, R = 20, T = 40, B = 50;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\">\n<title>" << Escape(title) << "</title>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\">" << Escape(title)
     << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
     << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  char buf[64];
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + k * (x1 - x0) / 4, yv = y0 + k * (y1 - y0) / 4;
    std::snprintf(buf, sizeof(buf), "%g", xv);
    os << "<text x=\"" << sx(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%g", yv);
    os << "<text x=\"" << L - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
       << buf << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << Escape(x_label)
     << "</text>\n";
  os << "<text x=\"14\" y=\"" << H / 2 << "\" transform=\"rotate(-90 14 " << H / 2
     << ")\" text-anchor=\"middle\">" << Escape(y_label) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    const char* color = kColors[i % 6];
    os << "<polyline class=\"series\" data-name=\"" << Escape(s.name) << "\" fill=\"none\" stroke=\""
       << color << "\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
       << " points=\"";
    for (const Point2& p : s.points) os << sx(p.first) << ',' << sy(p.second) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 16 * i << "\" fill=\"" << color
       << "\" font-size=\"12\">" << Escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mpcert
