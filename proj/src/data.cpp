/* Copyright (c) 2026 The SANet-cpp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "sanet/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace sanet {

namespace fs = std::filesystem;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("synth: " + what);
}

std::mt19937_64 scene_rng(std::uint64_t seed, std::size_t index) {
  const auto i = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
  return std::mt19937_64(seq);
}

// Running mean over [i - r, i + r] with edge replication, along one axis of
// a row-major h x w field.
void box_blur(std::vector<double>& f, std::size_t h, std::size_t w, std::size_t r, bool along_rows) {
  const std::size_t n = along_rows ? w : h, lines = along_rows ? h : w;
  const std::size_t stride = along_rows ? 1 : w;
  std::vector<double> line(n), out(n);
  const double norm = 1.0 / static_cast<double>(2 * r + 1);
  for (std::size_t l = 0; l < lines; ++l) {
    const std::size_t base = along_rows ? l * w : l;
    for (std::size_t i = 0; i < n; ++i) line[i] = f[base + i * stride];
    auto at = [&](long i) { return line[static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(n) - 1))]; };
    double s = 0;
    for (long k = -static_cast<long>(r); k <= static_cast<long>(r); ++k) s += at(k);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = s * norm;
      const long li = static_cast<long>(i);
      s += at(li + static_cast<long>(r) + 1) - at(li - static_cast<long>(r));
    }
    for (std::size_t i = 0; i < n; ++i) f[base + i * stride] = out[i];
  }
}

// Next whitespace-separated header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok += c;
  }
  return tok;
}

std::map<std::string, fs::path> pgm_files(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".pgm") out[e.path().stem().string()] = e.path();
  }
  return out;
}

Tensor<float> flip_plane(const Tensor<float>& t, bool horizontal, bool vertical) {
  const std::size_t h = t.dim(1), w = t.dim(2);
  Tensor<float> out(t.shape());
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t si = vertical ? h - 1 - i : i, sj = horizontal ? w - 1 - j : j;
      out[i * w + j] = t[si * w + sj];
    }
  }
  return out;
}

}  // namespace

void SynthParams::validate() const {
  require(height >= 9 && width >= 9, "height and width must be at least 9 (4 px margins)");
  require(targets_min <= targets_max, "targets_min exceeds targets_max");
  require(amplitude_min > 0.0, "amplitude_min must be > 0");
  require(amplitude_min <= amplitude_max && amplitude_max <= 1.0,
          "amplitude range must lie in (0, 1] with min <= max");
  require(sigma_min > 0.0 && sigma_min <= sigma_max, "sigma range must be positive with min <= max");
  require(clutter_amplitude >= 0.0, "clutter_amplitude must be >= 0");
  require(noise_sigma >= 0.0, "noise_sigma must be >= 0");
  require(background_level >= 0.0 && background_level <= 1.0, "background_level must lie in [0, 1]");
}

Sample synth_scene(const SynthParams& p, std::size_t index, std::vector<SynthTarget>* targets) {
  p.validate();
  std::mt19937_64 rng = scene_rng(p.seed, index);
  const std::size_t h = p.height, w = p.width;

  std::uniform_int_distribution<std::size_t> count(p.targets_min, p.targets_max);
  std::uniform_real_distribution<double> row(4.0, static_cast<double>(h) - 5.0),
      col(4.0, static_cast<double>(w) - 5.0), amp(p.amplitude_min, p.amplitude_max),
      sig(p.sigma_min, p.sigma_max);
  std::vector<SynthTarget> tg(count(rng));
  for (auto& t : tg) {
    t.row = row(rng);
    t.col = col(rng);
    t.amplitude = amp(rng);
    t.sigma = sig(rng);
  }

  // Smooth clutter: box-blurred white noise scaled to a peak deviation.
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> field(h * w);
  for (auto& v : field) v = normal(rng);
  const std::size_t r = std::max<std::size_t>(1, h / 8);
  box_blur(field, h, w, r, true);
  box_blur(field, h, w, r, false);
  const double mean = std::accumulate(field.begin(), field.end(), 0.0) / static_cast<double>(h * w);
  double peak = 0;
  for (auto& v : field) peak = std::max(peak, std::abs(v -= mean));
  const double scale = peak > 0 ? p.clutter_amplitude / peak : 0.0;

  Sample s;
  s.image = Tensor<float>({1, h, w});
  s.mask = Tensor<float>({1, h, w});
  s.id = "synth_" + std::to_string(p.seed) + "_" + std::to_string(index);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      double v = p.background_level + scale * field[i * w + j] + p.noise_sigma * normal(rng);
      bool hit = false;
      for (const auto& t : tg) {
        const double dr = static_cast<double>(i) - t.row, dc = static_cast<double>(j) - t.col;
        const double g = std::exp(-(dr * dr + dc * dc) / (2.0 * t.sigma * t.sigma));
        v += t.amplitude * g;
        hit = hit || g >= 0.5;
      }
      s.image[i * w + j] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      s.mask[i * w + j] = hit ? 1.0f : 0.0f;
    }
  }
  if (targets) *targets = std::move(tg);
  return s;
}

Dataset synth_dataset(const SynthParams& params, std::size_t count, std::size_t first_index) {
  Dataset out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(synth_scene(params, first_index + i));
  return out;
}

Tensor<float> read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (pgm_token(in) != "P5") throw IoError(path.string() + ": not a binary PGM (P5)");
  std::size_t w = 0, h = 0;
  unsigned long maxval = 0;
  try {
    w = std::stoul(pgm_token(in));
    h = std::stoul(pgm_token(in));
    maxval = std::stoul(pgm_token(in));
  } catch (const std::exception&) {
    throw IoError(path.string() + ": malformed PGM header");
  }
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) {
    throw IoError(path.string() + ": unsupported PGM geometry or maxval");
  }
  const std::size_t bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(w * h * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw IoError(path.string() + ": truncated pixel data");
  Tensor<float> out({1, h, w});
  for (std::size_t i = 0; i < w * h; ++i) {
    const unsigned v = bytes == 2 ? (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1] : raw[i];
    out[i] = static_cast<float>(std::min<double>(v, static_cast<double>(maxval)) / static_cast<double>(maxval));
  }
  return out;
}

void write_pgm(const fs::path& path, const Tensor<float>& image, std::uint16_t maxval) {
  if (image.rank() != 3 || image.dim(0) != 1) {
    throw ShapeError("write_pgm expects [1,H,W], got " + shape_str(image.shape()));
  }
  if (maxval == 0) throw std::invalid_argument("write_pgm: maxval must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << image.dim(2) << ' ' << image.dim(1) << '\n' << maxval << '\n';
  for (float v : image.values()) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * maxval));
    if (maxval > 255) out.put(static_cast<char>(q >> 8));
    out.put(static_cast<char>(q & 0xff));
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Dataset load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("dataset root " + root.string() + " does not exist");
  const auto images = pgm_files(root / "images"), masks = pgm_files(root / "masks");
  for (const auto& [stem, path] : masks) {
    if (!images.count(stem)) throw IoError("mask '" + stem + "' has no matching image");
  }
  Dataset out;
  for (const auto& [stem, path] : images) {
    auto m = masks.find(stem);
    if (m == masks.end()) throw IoError("image '" + stem + "' has no matching mask");
    Sample s;
    s.id = stem;
    s.image = read_pgm(path);
    s.mask = read_pgm(m->second);
    if (s.mask.shape() != s.image.shape()) {
      throw IoError("image and mask '" + stem + "' differ in size: " + shape_str(s.image.shape()) +
                    " vs " + shape_str(s.mask.shape()));
    }
    for (auto& v : s.mask.values()) v = v > 0.0f ? 1.0f : 0.0f;
    out.push_back(std::move(s));
  }
  return out;
}

void save_sample(const Sample& sample, const fs::path& root) {
  fs::create_directories(root / "images");
  fs::create_directories(root / "masks");
  write_pgm(root / "images" / (sample.id + ".pgm"), sample.image);
  write_pgm(root / "masks" / (sample.id + ".pgm"), sample.mask);
}

Sample resize(const Sample& s, std::size_t oh, std::size_t ow) {
  if (oh == 0 || ow == 0) throw std::invalid_argument("resize: target size must be positive");
  const std::size_t h = s.height(), w = s.width();
  Sample out;
  out.id = s.id;
  out.image = Tensor<float>({1, oh, ow});
  out.mask = Tensor<float>({1, oh, ow});
  const double sy = static_cast<double>(h) / static_cast<double>(oh);
  const double sx = static_cast<double>(w) / static_cast<double>(ow);
  for (std::size_t i = 0; i < oh; ++i) {
    const double fy = std::clamp((static_cast<double>(i) + 0.5) * sy - 0.5, 0.0, static_cast<double>(h - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, h - 1);
    const double ty = fy - static_cast<double>(y0);
    const std::size_t ny = std::min(static_cast<std::size_t>((static_cast<double>(i) + 0.5) * sy), h - 1);
    for (std::size_t j = 0; j < ow; ++j) {
      const double fx = std::clamp((static_cast<double>(j) + 0.5) * sx - 0.5, 0.0, static_cast<double>(w - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, w - 1);
      const double tx = fx - static_cast<double>(x0);
      auto px = [&](std::size_t y, std::size_t x) { return static_cast<double>(s.image[y * w + x]); };
      const double v = (1 - ty) * ((1 - tx) * px(y0, x0) + tx * px(y0, x1)) +
                       ty * ((1 - tx) * px(y1, x0) + tx * px(y1, x1));
      out.image[i * ow + j] = static_cast<float>(v);
      const std::size_t nx = std::min(static_cast<std::size_t>((static_cast<double>(j) + 0.5) * sx), w - 1);
      out.mask[i * ow + j] = s.mask[ny * w + nx];
    }
  }
  return out;
}

Sample flip(const Sample& s, bool horizontal, bool vertical) {
  return {flip_plane(s.image, horizontal, vertical), flip_plane(s.mask, horizontal, vertical), s.id};
}

Sample augment_flip(const Sample& s, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  const bool h = coin(rng);
  const bool v = coin(rng);
  return flip(s, h, v);
}

std::pair<Tensor<float>, Tensor<float>> make_batch(const Dataset& samples,
                                                   const std::vector<std::size_t>& idx) {
  if (idx.empty()) throw std::invalid_argument("make_batch: no samples");
  const std::size_t h = samples.at(idx[0]).height(), w = samples.at(idx[0]).width();
  Tensor<float> x({idx.size(), 1, h, w}), y({idx.size(), 1, h, w});
  for (std::size_t n = 0; n < idx.size(); ++n) {
    const Sample& s = samples.at(idx[n]);
    if (s.height() != h || s.width() != w) {
      throw ShapeError("make_batch: sample '" + s.id + "' is " + shape_str(s.image.shape()) +
                       ", batch is [1," + std::to_string(h) + "," + std::to_string(w) + "]");
    }
    std::copy(s.image.values().begin(), s.image.values().end(), x.data() + n * h * w);
    std::copy(s.mask.values().begin(), s.mask.values().end(), y.data() + n * h * w);
  }
  return {std::move(x), std::move(y)};
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& all, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) throw std::invalid_argument("holdout fraction must be in [0, 1)");
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto held = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(all.size())));
  std::pair<Dataset, Dataset> out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < order.size() - held ? out.first : out.second).push_back(all[order[k]]);
  }
  return out;
}

}  // namespace sanet
