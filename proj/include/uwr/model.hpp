#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uwr/autodiff.hpp"
#include "uwr/image.hpp"

namespace uwr {

struct Param {
  std::string name;
  Dims dims;
  std::vector<float> value;
};

/// A named differentiable enhancer f(x). Parameters are mutable (training);
/// forward passes never modify them.
class Model {
 public:
  std::string architecture;  // "affine" | "tiny-enhancer"
  std::vector<Param> params;
  nlohmann::json metadata = nlohmann::json::object();

  /// Minimum spatial extent accepted by forward.
  int min_size() const;

  /// Plain forward pass: f(x) with the current parameters.
  Image forward(const Image& x) const;

  /// Tape with x and parameter leaves wired to this architecture. Leaf values
  /// for the parameters are filled in; x must be set by the caller before
  /// tape.forward(). The tape can be replayed with fresh x values.
  struct Recorded {
    Tape tape;
    DiffTensor x;
    DiffTensor out;
    std::vector<DiffTensor> params;  // aligned with Model::params
  };
  Recorded record(int height, int width, bool input_grad, bool param_grad) const;

  /// Appends this architecture's forward graph to an existing tape, reusing
  /// already-created parameter leaves (one leaf per Model::params entry).
  DiffTensor wire(Tape& tape, const DiffTensor& x,
                  const std::vector<DiffTensor>& param_leaves) const;

  Param& param(const std::string& name);
  const Param& param(const std::string& name) const;
};

/// f(x)_c = a_c * x_c + b_c, unclamped. Closed-form test subject.
Model build_affine(const std::array<double, 3>& a, const std::array<double, 3>& b);

/// conv3x3(3->16) -> relu -> conv3x3(16->16) -> relu -> conv3x3(16->3) ->
/// sigmoid. Weights U(+-sqrt(6/fan_in)) from the seeded generator, biases 0.
Model build_tiny_enhancer(uint64_t seed);

/// Writes `model.json` (manifest) and `model.bin` (little-endian float32
/// parameters concatenated in manifest order) into dir. Round trip is
/// bit-exact.
void save_checkpoint(const Model& m, const std::string& dir);
Model load_checkpoint(const std::string& dir);

}  // namespace uwr
