#include "fracms/generators.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace fracms {

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi) { return hi <= lo ? lo : lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double real(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 rng_;
};

struct Builder {
  const GridHierarchy& grid;
  double aperture, kappa_f;
  int next_id;
  std::vector<Fracture> out;

  void add(std::vector<Vec2> pts, FractureModel model) {
    Fracture f;
    f.id = next_id++;
    f.polyline = std::move(pts);
    f.aperture = aperture;
    f.kappa_f = kappa_f;
    f.model = model;
    out.push_back(std::move(f));
  }
  Vec2 node(int i, int j) const { return grid.fine.node_position(i, j); }
};

/// Short node-aligned fractures strictly inside randomly chosen coarse
/// elements, kept 0.3 H away from the coarse edges.
void isolated(Builder& b, Sampler& s, double probability) {
  const int r = b.grid.refine;
  const int margin = std::max(1, 3 * r / 10);
  const int span = r - 2 * margin;
  if (span < 1) return;
  for (int K = 0; K < b.grid.num_coarse_elements(); ++K) {
    if (s.unit() >= probability) continue;
    const CellBox box = b.grid.coarse_element_box(K);
    const int len = s.integer(std::max(1, span / 2), span);
    const int orient = s.integer(0, 2);
    const int i = box.i0 + margin + s.integer(0, span - (orient == 1 ? 0 : len));
    const int j = box.j0 + margin + s.integer(0, span - (orient == 0 ? 0 : len));
    if (orient == 0)
      b.add({b.node(i, j), b.node(i + len, j)}, FractureModel::Dfm);
    else if (orient == 1)
      b.add({b.node(i, j), b.node(i, j + len)}, FractureModel::Dfm);
    else
      b.add({b.node(i, j), b.node(i + len, j + len)}, FractureModel::Dfm);
  }
}

/// Straight segment through the domain with endpoints kept off the boundary.
std::vector<Vec2> oblique_line(const Rect& d, Sampler& s) {
  const double angle = s.real(0.15, 0.35) * std::numbers::pi * (s.unit() < 0.5 ? 1.0 : -1.0);
  const Vec2 c(d.x0 + d.width() * s.real(0.35, 0.65), d.y0 + d.height() * s.real(0.35, 0.65));
  const double half = 0.4 * std::min(d.width(), d.height());
  const Vec2 dir(std::cos(angle), std::sin(angle));
  return {c - half * dir, c + half * dir};
}

}  // namespace

std::vector<std::string> generator_names() { return {"isolated", "channels", "network", "mixed", "single_efm", "curved"}; }

std::vector<Fracture> generate_fractures(const std::string& name, const GridHierarchy& grid, std::uint64_t seed,
                                         double aperture, double kappa_f, int first_id) {
  Builder b{grid, aperture, kappa_f, first_id, {}};
  Sampler s(seed);
  const FineGrid& fg = grid.fine;
  const Rect& d = fg.domain();

  if (name == "isolated") {
    isolated(b, s, 0.6);
  } else if (name == "channels") {
    const int count = s.integer(2, 3);
    for (int k = 0; k < count; ++k) {
      const int j = s.integer(1, fg.ny() - 1);
      const int i0 = s.integer(1, fg.nx() / 4);
      const int i1 = s.integer(3 * fg.nx() / 4, fg.nx() - 1);
      b.add({b.node(i0, j), b.node(i1, j)}, FractureModel::Dfm);
    }
    isolated(b, s, 0.3);
  } else if (name == "network") {
    for (int k = 0; k < 3; ++k) {
      const int j = s.integer(fg.ny() / 8, 7 * fg.ny() / 8);
      b.add({b.node(s.integer(1, fg.nx() / 3), j), b.node(s.integer(2 * fg.nx() / 3, fg.nx() - 1), j)},
            FractureModel::Dfm);
      const int i = s.integer(fg.nx() / 8, 7 * fg.nx() / 8);
      b.add({b.node(i, s.integer(1, fg.ny() / 3)), b.node(i, s.integer(2 * fg.ny() / 3, fg.ny() - 1))},
            FractureModel::Dfm);
    }
    const int n = std::min(fg.nx(), fg.ny());
    const int a = s.integer(n / 10, n / 4), len = s.integer(n / 2, n - 1 - a);
    b.add({b.node(a, a), b.node(a + len, a + len)}, FractureModel::Dfm);
  } else if (name == "mixed") {
    isolated(b, s, 0.4);
    const int count = s.integer(1, 2);
    for (int k = 0; k < count; ++k) b.add(oblique_line(d, s), FractureModel::Efm);
  } else if (name == "single_efm") {
    b.add(oblique_line(d, s), FractureModel::Efm);
  } else if (name == "curved") {
    isolated(b, s, 0.3);
    const Vec2 c(d.x0 + 0.5 * d.width(), d.y0 - d.height() * s.real(0.1, 0.4));
    const double radius = (Vec2(d.x0 + 0.5 * d.width(), d.y0 + 0.65 * d.height()) - c).norm();
    const double sweep = s.real(0.45, 0.7);
    std::vector<Vec2> pts;
    const int segs = 16;
    for (int k = 0; k <= segs; ++k) {
      const double t = std::numbers::pi / 2 + sweep * (2.0 * k / segs - 1.0);
      Vec2 p = c + radius * Vec2(std::cos(t), std::sin(t));
      p.x() = std::clamp(p.x(), d.x0 + 0.02 * d.width(), d.x1 - 0.02 * d.width());
      p.y() = std::clamp(p.y(), d.y0 + 0.02 * d.height(), d.y1 - 0.02 * d.height());
      pts.push_back(p);
    }
    b.add(std::move(pts), FractureModel::Efm);
  } else {
    throw Error("unknown fracture generator '" + name + "'");
  }
  return b.out;
}

}  // namespace fracms
