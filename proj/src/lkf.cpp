#include "seaice/lkf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <opencv2/imgproc.hpp>
#include <opencv2/ximgproc.hpp>
#include <stdexcept>

namespace seaice {

int locate_element(const Discretization& op, Point p) {
  const Grid& g = op.grid;
  const int c = g.locate_cell(p);
  if (op.staggering != Staggering::CD2) return c;
  const Point m = g.cell_center(c);
  const double dx = (p.x - m.x) / (0.5 * g.hx());
  const double dy = (p.y - m.y) / (0.5 * g.hy());
  if (std::abs(dx) + std::abs(dy) <= 1.0) return c;
  const auto [i, j] = g.cell_ij(c);
  return g.num_cells() + g.vertex(i + (dx > 0.0 ? 1 : 0), j + (dy > 0.0 ? 1 : 0));
}

Image regrid(const Discretization& op, std::span<const double> elem_field, double pixel_m, RegridMode mode) {
  const double L = op.grid.length();
  Image img;
  img.pixel_m = pixel_m;
  img.width = static_cast<int>(std::lround(L / pixel_m));
  img.height = img.width;
  img.data.assign(static_cast<std::size_t>(img.width) * img.height, 0.0);
  const int sub = mode == RegridMode::Nearest ? 1 : 4;
  for (int j = 0; j < img.height; ++j) {
    for (int i = 0; i < img.width; ++i) {
      double s = 0.0;
      for (int b = 0; b < sub; ++b)
        for (int a = 0; a < sub; ++a) {
          const Point p{(i + (a + 0.5) / sub) * pixel_m, (j + (b + 0.5) / sub) * pixel_m};
          s += elem_field[locate_element(op, p)];
        }
      img.at(i, j) = s / (sub * sub);
    }
  }
  return img;
}

void DetectorParams::validate() const {
  if (!(log_floor > 0.0)) throw std::invalid_argument("detector: log_floor must be positive");
  if (!(sigma_small > 0.0) || !(sigma_small < sigma_large))
    throw std::invalid_argument("detector: need 0 < sigma_small < sigma_large");
  if (!(threshold_quantile > 0.0 && threshold_quantile < 1.0))
    throw std::invalid_argument("detector: threshold_quantile must be in (0,1)");
  if (min_length_px < 1) throw std::invalid_argument("detector: min_length_px must be >= 1");
  if (min_width_px < 2) throw std::invalid_argument("detector: min_width_px must be >= 2");
}

double polyline_length_km(std::span<const PixelCoord> px, double pixel_km) {
  double len = 0.0;
  for (std::size_t k = 1; k < px.size(); ++k) {
    const bool diag = px[k].x != px[k - 1].x && px[k].y != px[k - 1].y;
    len += diag ? std::numbers::sqrt2 * pixel_km : pixel_km;
  }
  return len;
}

LKFStats lkf_stats(std::span<const LKFSegment> segments) {
  LKFStats s;
  s.count = static_cast<int>(segments.size());
  for (const auto& seg : segments) s.total_length_km += seg.length_km;
  return s;
}

namespace {

constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

class Mask {
 public:
  Mask(int w, int h) : w_(w), h_(h), d_(static_cast<std::size_t>(w) * h, 0) {}
  bool get(int x, int y) const { return x >= 0 && y >= 0 && x < w_ && y < h_ && d_[idx(x, y)]; }
  void set(int x, int y, bool v) { d_[idx(x, y)] = v ? 1 : 0; }
  int neighbours(int x, int y) const {
    int n = 0;
    for (int k = 0; k < 8; ++k) n += get(x + kDx[k], y + kDy[k]) ? 1 : 0;
    return n;
  }
  int width() const { return w_; }
  int height() const { return h_; }
  std::vector<std::uint8_t>& raw() { return d_; }

 private:
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * w_ + x; }
  int w_, h_;
  std::vector<std::uint8_t> d_;
};

// True if the set 8-neighbours of (x,y) form one 8-connected group once (x,y) is gone.
bool neighbours_connected(const Mask& m, int x, int y) {
  std::array<bool, 8> on{};
  int count = 0;
  for (int k = 0; k < 8; ++k) {
    on[k] = m.get(x + kDx[k], y + kDy[k]);
    count += on[k] ? 1 : 0;
  }
  if (count == 0) return true;
  std::array<bool, 8> seen{};
  std::array<int, 8> stack{};
  int top = 0;
  int first = 0;
  while (!on[first]) ++first;
  stack[top++] = first;
  seen[first] = true;
  int reached = 1;
  while (top > 0) {
    const int a = stack[--top];
    for (int b = 0; b < 8; ++b) {
      if (!on[b] || seen[b]) continue;
      if (std::abs(kDx[a] - kDx[b]) <= 1 && std::abs(kDy[a] - kDy[b]) <= 1) {
        seen[b] = true;
        stack[top++] = b;
        ++reached;
      }
    }
  }
  return reached == count;
}

// Strip pixels not needed for 8-connectivity (staircase corners of a 4-connected skeleton).
void make_8_minimal(Mask& m) {
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.get(x, y) && m.neighbours(x, y) >= 2 && neighbours_connected(m, x, y)) m.set(x, y, false);
}

// Thinning eats into the ends of a feature; walk each end point back out along
// its own direction until it leaves the region it was thinned from.
void extend_ends(Mask& m, const cv::Mat& region) {
  std::vector<std::array<int, 4>> ends;  // x, y, dx, dy
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (!m.get(x, y) || m.neighbours(x, y) != 1) continue;
      for (int k = 0; k < 8; ++k)
        if (m.get(x + kDx[k], y + kDy[k])) ends.push_back({x, y, -kDx[k], -kDy[k]});
    }
  for (auto [x, y, dx, dy] : ends) {
    while (true) {
      const int ax = x + dx, ay = y + dy;
      if (ax < 0 || ay < 0 || ax >= m.width() || ay >= m.height() || !region.at<std::uint8_t>(ay, ax)) break;
      if (m.get(ax, ay) || m.neighbours(ax, ay) != 1) break;  // would touch another branch
      m.set(ax, ay, true);
      x = ax;
      y = ay;
    }
  }
}

std::vector<PixelCoord> trace(const Mask& m, std::vector<std::uint8_t>& visited, int sx, int sy) {
  std::vector<PixelCoord> path;
  int x = sx, y = sy;
  while (true) {
    visited[static_cast<std::size_t>(y) * m.width() + x] = 1;
    path.push_back({x, y});
    int nx = -1, ny = -1;
    // Axis neighbours first, so a diagonal shortcut is never taken over a step.
    for (int pass = 0; pass < 2 && nx < 0; ++pass) {
      for (int k = pass; k < 8; k += 2) {
        const int ax = x + kDx[k], ay = y + kDy[k];
        if (m.get(ax, ay) && !visited[static_cast<std::size_t>(ay) * m.width() + ax]) {
          nx = ax;
          ny = ay;
          break;
        }
      }
    }
    if (nx < 0) break;
    x = nx;
    y = ny;
  }
  return path;
}

}  // namespace

std::vector<LKFSegment> detect(const Image& image, const DetectorParams& p, DetectionStages* stages) {
  p.validate();
  const int w = image.width;
  const int h = image.height;
  if (w == 0 || h == 0) return {};

  cv::Mat logf(h, w, CV_64F);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) logf.at<double>(j, i) = std::log10(std::max(image.at(i, j), p.log_floor));
  cv::Mat g1, g2;
  cv::GaussianBlur(logf, g1, cv::Size(0, 0), p.sigma_small, p.sigma_small, cv::BORDER_REFLECT);
  cv::GaussianBlur(logf, g2, cv::Size(0, 0), p.sigma_large, p.sigma_large, cv::BORDER_REFLECT);
  const cv::Mat resp = g1 - g2;

  // Threshold: the requested quantile of the rectified response, but never
  // below 5% of the peak. On a quiet background the quantile alone falls into
  // the noise (or round-off ripples); on model fields it sits near 10% of the
  // peak and the floor is inactive.
  std::vector<double> rect(static_cast<std::size_t>(w) * h);
  double peak = 0.0;
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      const double r = std::max(resp.at<double>(j, i), 0.0);
      rect[static_cast<std::size_t>(j) * w + i] = r;
      peak = std::max(peak, r);
    }
  std::vector<double> sorted = rect;
  const auto k = static_cast<std::size_t>(std::floor(p.threshold_quantile * static_cast<double>(sorted.size() - 1)));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
  const double threshold = std::max(sorted[k], 0.05 * peak);

  cv::Mat bin(h, w, CV_8U, cv::Scalar(0));
  if (peak > 0.0)
    for (int j = 0; j < h; ++j)
      for (int i = 0; i < w; ++i)
        if (rect[static_cast<std::size_t>(j) * w + i] > threshold) bin.at<std::uint8_t>(j, i) = 255;

  // Width gate. The band-pass smears a one-pixel line over several pixels, so
  // width is judged on the unblurred contrast against the large-scale
  // background: a component is kept if it holds a min_width x min_width block
  // at or above half of its own peak contrast.
  cv::Mat labels;
  const int nlab = cv::connectedComponents(bin, labels, 8, CV_32S);
  const cv::Mat contrast = logf - g2;
  std::vector<double> comp_peak(nlab, -std::numeric_limits<double>::infinity());
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      const int l = labels.at<int>(j, i);
      if (l > 0) comp_peak[l] = std::max(comp_peak[l], contrast.at<double>(j, i));
    }
  cv::Mat crest(h, w, CV_8U, cv::Scalar(0));
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      const int l = labels.at<int>(j, i);
      if (l > 0 && contrast.at<double>(j, i) >= 0.5 * comp_peak[l]) crest.at<std::uint8_t>(j, i) = 255;
    }
  cv::Mat eroded;
  const cv::Mat kernel = cv::Mat::ones(p.min_width_px, p.min_width_px, CV_8U);
  cv::erode(crest, eroded, kernel, cv::Point(0, 0), 1, cv::BORDER_CONSTANT, cv::Scalar(0));
  std::vector<std::uint8_t> keep(nlab, 0);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i)
      if (eroded.at<std::uint8_t>(j, i)) keep[labels.at<int>(j, i)] = 1;
  cv::Mat wide(h, w, CV_8U, cv::Scalar(0));
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      const int l = labels.at<int>(j, i);
      if (l > 0 && keep[l]) wide.at<std::uint8_t>(j, i) = 255;
    }

  cv::Mat skel;
  cv::ximgproc::thinning(wide, skel, cv::ximgproc::THINNING_ZHANGSUEN);
  Mask m(w, h);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) m.set(i, j, skel.at<std::uint8_t>(j, i) != 0);
  make_8_minimal(m);
  extend_ends(m, wide);

  if (stages) {
    stages->response.assign(static_cast<std::size_t>(w) * h, 0.0);
    stages->binary.assign(static_cast<std::size_t>(w) * h, 0);
    stages->wide.assign(static_cast<std::size_t>(w) * h, 0);
    for (int j = 0; j < h; ++j)
      for (int i = 0; i < w; ++i) {
        const std::size_t q = static_cast<std::size_t>(j) * w + i;
        stages->response[q] = resp.at<double>(j, i);
        stages->binary[q] = bin.at<std::uint8_t>(j, i) ? 1 : 0;
        stages->wide[q] = wide.at<std::uint8_t>(j, i) ? 1 : 0;
      }
    stages->threshold = threshold;
    stages->skeleton = m.raw();
  }

  // Split at junctions.
  Mask pieces = m;
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i)
      if (m.get(i, j) && m.neighbours(i, j) >= 3) pieces.set(i, j, false);

  std::vector<std::uint8_t> visited(static_cast<std::size_t>(w) * h, 0);
  std::vector<LKFSegment> out;
  // A piece that stops next to a junction pixel is carried onto it, so the
  // arms of a crossing still meet.
  auto junction_next_to = [&](PixelCoord q) -> std::optional<PixelCoord> {
    for (int pass = 0; pass < 2; ++pass)
      for (int k = pass; k < 8; k += 2) {
        const int ax = q.x + kDx[k], ay = q.y + kDy[k];
        if (m.get(ax, ay) && !pieces.get(ax, ay)) return PixelCoord{ax, ay};
      }
    return std::nullopt;
  };
  auto emit = [&](std::vector<PixelCoord> path) {
    if (auto j = junction_next_to(path.front())) path.insert(path.begin(), *j);
    if (auto j = junction_next_to(path.back()); j && !(path.size() > 1 && *j == path.front())) path.push_back(*j);
    if (static_cast<int>(path.size()) < p.min_length_px) return;
    LKFSegment s;
    s.length_km = polyline_length_km(path, image.pixel_m / 1000.0);
    double sum = 0.0;
    for (const auto& q : path) sum += image.at(q.x, q.y);
    s.mean_intensity = sum / static_cast<double>(path.size());
    s.pixels = std::move(path);
    out.push_back(std::move(s));
  };
  // Open pieces from their end points, then any remaining closed loops.
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i)
      if (pieces.get(i, j) && !visited[static_cast<std::size_t>(j) * w + i] && pieces.neighbours(i, j) <= 1)
        emit(trace(pieces, visited, i, j));
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i)
      if (pieces.get(i, j) && !visited[static_cast<std::size_t>(j) * w + i]) emit(trace(pieces, visited, i, j));
  return out;
}

}  // namespace seaice
