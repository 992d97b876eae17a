#include "uwr/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "uwr/error.hpp"
#include "uwr/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian");

namespace uwr {

namespace {

std::vector<Param> architecture_skeleton(const std::string& arch) {
  if (arch == "affine") {
    return {{"a", Dims::vec(3), {}}, {"b", Dims::vec(3), {}}};
  }
  if (arch == "tiny-enhancer") {
    return {{"conv1.weight", Dims::conv_weights(16, 3, 3), {}},
            {"conv1.bias", Dims::vec(16), {}},
            {"conv2.weight", Dims::conv_weights(16, 16, 3), {}},
            {"conv2.bias", Dims::vec(16), {}},
            {"conv3.weight", Dims::conv_weights(3, 16, 3), {}},
            {"conv3.bias", Dims::vec(3), {}}};
  }
  throw ValidationError("unknown architecture id: " + arch);
}

}  // namespace

int Model::min_size() const { return architecture == "tiny-enhancer" ? 3 : 1; }

Param& Model::param(const std::string& name) {
  for (Param& p : params)
    if (p.name == name) return p;
  throw ValidationError("model: no parameter named " + name);
}

const Param& Model::param(const std::string& name) const {
  return const_cast<Model*>(this)->param(name);
}

DiffTensor Model::wire(Tape& tape, const DiffTensor& x,
                       const std::vector<DiffTensor>& param_leaves) const {
  if (param_leaves.size() != params.size())
    throw ValidationError("model wire: parameter leaf count mismatch");
  if (architecture == "affine")
    return tape.channel_affine(x, param_leaves[0], param_leaves[1]);
  if (architecture == "tiny-enhancer") {
    DiffTensor h1 = tape.relu(tape.conv2d(x, param_leaves[0], param_leaves[1]));
    DiffTensor h2 = tape.relu(tape.conv2d(h1, param_leaves[2], param_leaves[3]));
    return tape.sigmoid(tape.conv2d(h2, param_leaves[4], param_leaves[5]));
  }
  throw ValidationError("unknown architecture id: " + architecture);
}

Model::Recorded Model::record(int height, int width, bool input_grad,
                              bool param_grad) const {
  if (height < min_size() || width < min_size())
    throw ValidationError("model forward: input below minimum size for " +
                          architecture);
  Recorded r;
  r.x = r.tape.leaf(Dims::chw(3, height, width), input_grad);
  r.params.reserve(params.size());
  for (const Param& p : params) {
    DiffTensor t = r.tape.leaf(p.dims, param_grad);
    r.tape.set_value(t, p.value);
    r.params.push_back(t);
  }
  r.out = wire(r.tape, r.x, r.params);
  return r;
}

Image Model::forward(const Image& x) const {
  Recorded r = record(x.height, x.width, false, false);
  r.tape.set_value(r.x, x);
  r.tape.forward();
  return r.tape.value_as_image(r.out);
}

Model build_affine(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  for (int c = 0; c < 3; ++c)
    if (!std::isfinite(a[c]) || !std::isfinite(b[c]))
      throw ValidationError("build_affine: non-finite coefficient");
  Model m;
  m.architecture = "affine";
  m.params = architecture_skeleton(m.architecture);
  for (int c = 0; c < 3; ++c) {
    m.params[0].value.push_back(static_cast<float>(a[c]));
    m.params[1].value.push_back(static_cast<float>(b[c]));
  }
  return m;
}

Model build_tiny_enhancer(uint64_t seed) {
  Model m;
  m.architecture = "tiny-enhancer";
  m.params = architecture_skeleton(m.architecture);
  Rng rng(seed);
  for (Param& p : m.params) {
    const long n = p.dims.numel();
    p.value.resize(n);
    if (p.dims.n == 4) {
      const int fan_in = p.dims.d[1] * p.dims.d[2] * p.dims.d[3];
      const double bound = std::sqrt(6.0 / fan_in);
      for (long i = 0; i < n; ++i)
        p.value[i] = static_cast<float>(rng.uniform(-bound, bound));
    } else {
      std::fill(p.value.begin(), p.value.end(), 0.0f);
    }
  }
  m.metadata["init_seed"] = seed;
  return m;
}

void save_checkpoint(const Model& m, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  nlohmann::json manifest;
  manifest["format_version"] = "1";
  manifest["architecture"] = m.architecture;
  manifest["metadata"] = m.metadata;
  nlohmann::json plist = nlohmann::json::array();
  for (const Param& p : m.params) {
    nlohmann::json e;
    e["name"] = p.name;
    std::vector<int> shape(p.dims.d.begin(), p.dims.d.begin() + p.dims.n);
    e["shape"] = shape;
    plist.push_back(e);
  }
  manifest["params"] = plist;

  const fs::path jpath = fs::path(dir) / "model.json";
  std::ofstream jf(jpath);
  if (!jf) throw std::runtime_error("save_checkpoint: cannot write " + jpath.string());
  jf << manifest.dump(2) << "\n";
  jf.close();
  if (!jf) throw std::runtime_error("save_checkpoint: write failed: " + jpath.string());

  const fs::path bpath = fs::path(dir) / "model.bin";
  std::ofstream bf(bpath, std::ios::binary);
  if (!bf) throw std::runtime_error("save_checkpoint: cannot write " + bpath.string());
  for (const Param& p : m.params)
    bf.write(reinterpret_cast<const char*>(p.value.data()),
             static_cast<std::streamsize>(p.value.size() * sizeof(float)));
  bf.close();
  if (!bf) throw std::runtime_error("save_checkpoint: write failed: " + bpath.string());
}

Model load_checkpoint(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path jpath = fs::path(dir) / "model.json";
  std::ifstream jf(jpath);
  if (!jf) throw ValidationError("load_checkpoint: missing " + jpath.string());
  nlohmann::json manifest;
  try {
    jf >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("load_checkpoint: bad manifest: " + std::string(e.what()));
  }

  if (manifest.value("format_version", "") != "1")
    throw ValidationError("load_checkpoint: unsupported format version");
  Model m;
  m.architecture = manifest.value("architecture", "");
  m.params = architecture_skeleton(m.architecture);
  m.metadata = manifest.value("metadata", nlohmann::json::object());

  const auto& plist = manifest.at("params");
  if (plist.size() != m.params.size())
    throw ValidationError("load_checkpoint: wrong parameter count for " +
                          m.architecture);
  for (size_t i = 0; i < m.params.size(); ++i) {
    const auto& e = plist.at(i);
    if (e.at("name").get<std::string>() != m.params[i].name)
      throw ValidationError("load_checkpoint: unexpected parameter " +
                            e.at("name").get<std::string>());
    const auto shape = e.at("shape").get<std::vector<int>>();
    const Dims& d = m.params[i].dims;
    if (static_cast<int>(shape.size()) != d.n ||
        !std::equal(shape.begin(), shape.end(), d.d.begin()))
      throw ValidationError("load_checkpoint: shape mismatch for " + m.params[i].name);
  }

  const fs::path bpath = fs::path(dir) / "model.bin";
  std::ifstream bf(bpath, std::ios::binary | std::ios::ate);
  if (!bf) throw ValidationError("load_checkpoint: missing " + bpath.string());
  const std::streamsize blob_len = bf.tellg();
  std::streamsize expect = 0;
  for (const Param& p : m.params)
    expect += static_cast<std::streamsize>(p.dims.numel() * sizeof(float));
  if (blob_len != expect)
    throw ValidationError("load_checkpoint: corrupt blob (" +
                          std::to_string(blob_len) + " bytes, expected " +
                          std::to_string(expect) + ")");
  bf.seekg(0);
  for (Param& p : m.params) {
    p.value.resize(p.dims.numel());
    bf.read(reinterpret_cast<char*>(p.value.data()),
            static_cast<std::streamsize>(p.value.size() * sizeof(float)));
  }
  if (!bf) throw ValidationError("load_checkpoint: truncated blob");
  return m;
}

}  // namespace uwr
