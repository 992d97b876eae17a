#include "uwr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "uwr/error.hpp"
#include "uwr/parallel.hpp"
#include "uwr/png_io.hpp"
#include "uwr/rng.hpp"

namespace uwr {

namespace fs = std::filesystem;

void DegradationParams::validate() const {
  for (double b : beta)
    if (!(b >= 0.0)) throw ValidationError("degradation: beta must be >= 0");
  for (double b : backscatter)
    if (!(b >= 0.0 && b <= 1.0))
      throw ValidationError("degradation: backscatter must lie in [0,1]");
  if (!(d_min >= 0.0 && d_max >= d_min))
    throw ValidationError("degradation: depth range must be nonnegative and ordered");
  if (!(noise_sigma >= 0.0))
    throw ValidationError("degradation: noise sigma must be >= 0");
}

DegradationParams water_preset(const std::string& name) {
  DegradationParams p;
  if (name == "I")
    p.beta = {0.8, 0.4, 0.2};
  else if (name == "II")
    p.beta = {1.2, 0.6, 0.3};
  else if (name == "III")
    p.beta = {1.8, 0.9, 0.45};
  else
    throw ValidationError("unknown water preset: " + name + " (expected I, II or III)");
  return p;
}

Image synth_clean(uint64_t seed, int size) {
  if (size < 16) throw ValidationError("synth_clean: size must be >= 16");
  Rng rng(seed);
  std::array<double, 3> c0, c1;
  for (double& v : c0) v = rng.uniform();
  for (double& v : c1) v = rng.uniform();
  const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  const double ca = std::cos(angle), sa = std::sin(angle);

  Image img(size, size);
  const long n = img.pixels();
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double u = (x + 0.5) / size - 0.5;
      const double v = (y + 0.5) / size - 0.5;
      const double t = std::clamp(ca * u + sa * v + 0.5, 0.0, 1.0);
      for (int c = 0; c < 3; ++c)
        img.data[c * n + static_cast<long>(y) * size + x] =
            (1.0 - t) * c0[c] + t * c1[c];
    }

  const int shapes = 3 + static_cast<int>(rng.uniform_index(6));  // 3..8
  for (int s = 0; s < shapes; ++s) {
    const bool ellipse = rng.uniform_index(2) == 0;
    std::array<double, 3> col;
    for (double& v : col) v = rng.uniform();
    const double cx = rng.uniform(0.1, 0.9) * size;
    const double cy = rng.uniform(0.1, 0.9) * size;
    const double rx = rng.uniform(0.05, 0.3) * size;
    const double ry = rng.uniform(0.05, 0.3) * size;
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - rx)));
    const int x1 = std::min(size - 1, static_cast<int>(std::ceil(cx + rx)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - ry)));
    const int y1 = std::min(size - 1, static_cast<int>(std::ceil(cy + ry)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double dx = (x + 0.5 - cx) / rx;
        const double dy = (y + 0.5 - cy) / ry;
        const bool inside = ellipse ? (dx * dx + dy * dy <= 1.0)
                                    : (std::fabs(dx) <= 1.0 && std::fabs(dy) <= 1.0);
        if (!inside) continue;
        for (int c = 0; c < 3; ++c)
          img.data[c * n + static_cast<long>(y) * size + x] = col[c];
      }
  }
  return img;
}

namespace {

Image box_blur3(const Image& img) {
  Image out(img.height, img.width);
  const long n = img.pixels();
  for (int c = 0; c < 3; ++c) {
    const double* p = img.data.data() + c * n;
    double* o = out.data.data() + c * n;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        double acc = 0.0;
        int cnt = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = y + dy;
          if (yy < 0 || yy >= img.height) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx;
            if (xx < 0 || xx >= img.width) continue;
            acc += p[static_cast<long>(yy) * img.width + xx];
            ++cnt;
          }
        }
        o[static_cast<long>(y) * img.width + x] = acc / cnt;
      }
  }
  return out;
}

}  // namespace

Image degrade(const Image& y, double d, const DegradationParams& p, uint64_t seed) {
  p.validate();
  Image x(y.height, y.width);
  const long n = y.pixels();
  for (int c = 0; c < 3; ++c) {
    const double trans = std::exp(-p.beta[c] * d);
    const double back = p.backscatter[c] * (1.0 - trans);
    const double* src = y.data.data() + c * n;
    double* dst = x.data.data() + c * n;
    for (long i = 0; i < n; ++i) dst[i] = src[i] * trans + back;
  }
  if (p.blur) x = box_blur3(x);
  if (p.noise_sigma > 0.0) {
    Rng rng(seed);
    for (double& v : x.data) v += rng.normal(p.noise_sigma);
  }
  return clamp01(x);
}

PairedDataset generate_dataset(const std::string& out_dir, int count, int size,
                               const DegradationParams& p, uint64_t seed,
                               double train_frac, unsigned jobs) {
  if (count < 1) throw ValidationError("generate_dataset: count must be >= 1");
  if (!(train_frac >= 0.0 && train_frac <= 1.0))
    throw ValidationError("generate_dataset: train_frac must lie in [0,1]");
  p.validate();
  fs::create_directories(fs::path(out_dir) / "clean");
  fs::create_directories(fs::path(out_dir) / "degraded");

  std::vector<std::string> names(count);
  parallel_for(static_cast<size_t>(count), jobs, [&](size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04zu.png", i);
    names[i] = buf;
    const Image clean = synth_clean(derive_seed(seed, i, 0), size);
    const double d =
        Rng(derive_seed(seed, i, 1)).uniform(p.d_min, p.d_max);
    const Image degraded = degrade(clean, d, p, derive_seed(seed, i, 2));
    save_png((fs::path(out_dir) / "clean" / names[i]).string(), clean);
    save_png((fs::path(out_dir) / "degraded" / names[i]).string(), degraded);
  });

  const int n_train = std::min<long>(count, std::llround(train_frac * count));
  PairedDataset ds;
  nlohmann::json train_list = nlohmann::json::array();
  nlohmann::json test_list = nlohmann::json::array();
  for (int i = 0; i < count; ++i) {
    ds.pairs.push_back({names[i],
                        (fs::path(out_dir) / "degraded" / names[i]).string(),
                        (fs::path(out_dir) / "clean" / names[i]).string()});
    if (i < n_train) {
      ds.train_idx.push_back(i);
      train_list.push_back(names[i]);
    } else {
      ds.test_idx.push_back(i);
      test_list.push_back(names[i]);
    }
  }

  nlohmann::json manifest;
  manifest["format_version"] = "1";
  manifest["count"] = count;
  manifest["size"] = size;
  manifest["seed"] = seed;
  manifest["train_frac"] = train_frac;
  manifest["params"] = {{"beta", p.beta},
                        {"backscatter", p.backscatter},
                        {"d_min", p.d_min},
                        {"d_max", p.d_max},
                        {"blur", p.blur},
                        {"noise_sigma", p.noise_sigma}};
  manifest["split"] = {{"train", train_list}, {"test", test_list}};
  ds.manifest = manifest;

  std::ofstream mf(fs::path(out_dir) / "manifest.json");
  if (!mf) throw std::runtime_error("generate_dataset: cannot write manifest.json");
  mf << manifest.dump(2) << "\n";
  return ds;
}

PairedDataset load_paired_dir(const std::string& dir) {
  const fs::path clean_dir = fs::path(dir) / "clean";
  const fs::path degraded_dir = fs::path(dir) / "degraded";
  if (!fs::is_directory(clean_dir) || !fs::is_directory(degraded_dir))
    throw ValidationError("load_paired_dir: " + dir +
                          " must contain clean/ and degraded/ subdirectories");

  auto list_pngs = [](const fs::path& d) {
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(d))
      if (e.is_regular_file() && e.path().extension() == ".png")
        names.insert(e.path().filename().string());
    return names;
  };
  const std::set<std::string> clean_names = list_pngs(clean_dir);
  const std::set<std::string> degraded_names = list_pngs(degraded_dir);
  for (const std::string& n : clean_names)
    if (!degraded_names.count(n))
      throw ValidationError("load_paired_dir: clean/" + n + " has no degraded twin");
  for (const std::string& n : degraded_names)
    if (!clean_names.count(n))
      throw ValidationError("load_paired_dir: degraded/" + n + " has no clean twin");
  if (clean_names.empty())
    throw ValidationError("load_paired_dir: no image pairs in " + dir);

  PairedDataset ds;
  ds.manifest = nlohmann::json::object();
  int h = -1, w = -1;
  for (const std::string& n : clean_names) {  // std::set iterates sorted
    PairedSample s{n, (degraded_dir / n).string(), (clean_dir / n).string()};
    for (const std::string* path : {&s.x_path, &s.y_path}) {
      const Image img = load_png(*path);
      if (h < 0) {
        h = img.height;
        w = img.width;
      } else if (img.height != h || img.width != w) {
        throw ValidationError("load_paired_dir: size mismatch at " + *path);
      }
    }
    ds.pairs.push_back(std::move(s));
  }

  const fs::path mpath = fs::path(dir) / "manifest.json";
  if (fs::exists(mpath)) {
    std::ifstream mf(mpath);
    try {
      mf >> ds.manifest;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("load_paired_dir: bad manifest.json: " +
                            std::string(e.what()));
    }
    auto resolve = [&](const nlohmann::json& list) {
      std::vector<int> idx;
      for (const auto& n : list) {
        const std::string name = n.get<std::string>();
        const auto it = std::find_if(ds.pairs.begin(), ds.pairs.end(),
                                     [&](const PairedSample& s) { return s.name == name; });
        if (it == ds.pairs.end())
          throw ValidationError("load_paired_dir: manifest lists missing pair " + name);
        idx.push_back(static_cast<int>(it - ds.pairs.begin()));
      }
      return idx;
    };
    ds.train_idx = resolve(ds.manifest.at("split").at("train"));
    ds.test_idx = resolve(ds.manifest.at("split").at("test"));
  } else {
    for (int i = 0; i < static_cast<int>(ds.pairs.size()); ++i) {
      ds.train_idx.push_back(i);
      ds.test_idx.push_back(i);
    }
  }
  return ds;
}

std::vector<LoadedPair> load_pairs(const PairedDataset& ds, const std::string& split) {
  const std::vector<int>* idx = nullptr;
  if (split == "train")
    idx = &ds.train_idx;
  else if (split == "test")
    idx = &ds.test_idx;
  else
    throw ValidationError("load_pairs: unknown split " + split);
  std::vector<LoadedPair> out(idx->size());
  for (size_t k = 0; k < idx->size(); ++k) {
    const PairedSample& s = ds.pairs.at((*idx)[k]);
    out[k].name = s.name;
    out[k].x = load_png(s.x_path);
    out[k].y = load_png(s.y_path);
  }
  return out;
}

std::vector<std::vector<int>> batch_iter(int n, int batch_size, uint64_t seed,
                                         int epoch) {
  if (batch_size < 1) throw ValidationError("batch_iter: batch size must be >= 1");
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, static_cast<uint64_t>(epoch), 1));
  rng.shuffle(order);
  std::vector<std::vector<int>> batches;
  for (int b = 0; b < n; b += batch_size) {
    const int e = std::min(n, b + batch_size);
    batches.emplace_back(order.begin() + b, order.begin() + e);
  }
  return batches;
}

}  // namespace uwr
