#pragma once

// Binary model persistence. Layout (little endian):
//   8 bytes   magic "CGADCKPT"
//   u32       format version (currently 1)
//   u32       tensor count
//   per tensor:
//     u32     name length, then that many name bytes
//     i64     rows, i64 cols
//     doubles rows*cols raw 8-byte payloads, row major
// Doubles are copied bit for bit, so a round trip reproduces parameters
// exactly. Short reads, trailing bytes, or a foreign version are refused;
// there is no silent migration.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "cesgad/error.hpp"
#include "cesgad/trainer.hpp"

namespace cesgad {

inline constexpr char kCheckpointMagic[8] = {'C', 'G', 'A', 'D',
                                             'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Matrix value;
};

namespace detail {

template <typename T>
void write_pod(std::string& out, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.append(bytes, sizeof(T));
}

class CheckpointReader {
 public:
  CheckpointReader(std::ifstream& in, std::string path)
      : in_(in), path_(std::move(path)) {}

  void read_bytes(char* dst, std::size_t count) {
    in_.read(dst, static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in_.gcount()) != count) {
      throw data_error("checkpoint " + path_ + ": truncated file");
    }
  }

  template <typename T>
  T read_pod() {
    char bytes[sizeof(T)];
    read_bytes(bytes, sizeof(T));
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
  }

  bool at_end() {
    return in_.peek() == std::ifstream::traits_type::eof();
  }

  const std::string& path() const { return path_; }

 private:
  std::ifstream& in_;
  std::string path_;
};

}  // namespace detail

inline void save_tensors(const std::filesystem::path& path,
                         const std::vector<NamedTensor>& tensors) {
  std::string out;
  out.append(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::write_pod(out, kCheckpointVersion);
  detail::write_pod(out, static_cast<std::uint32_t>(tensors.size()));
  for (const NamedTensor& t : tensors) {
    detail::write_pod(out, static_cast<std::uint32_t>(t.name.size()));
    out.append(t.name);
    detail::write_pod(out, static_cast<std::int64_t>(t.value.rows()));
    detail::write_pod(out, static_cast<std::int64_t>(t.value.cols()));
    for (Eigen::Index i = 0; i < t.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.value.cols(); ++j) {
        detail::write_pod(out, t.value(i, j));
      }
    }
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw data_error("cannot write checkpoint " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw data_error("failed writing checkpoint " + path.string());
}

inline std::vector<NamedTensor> load_tensors(
    const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw data_error("cannot read checkpoint " + path.string());
  detail::CheckpointReader in(file, path.string());

  char magic[sizeof(kCheckpointMagic)];
  in.read_bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw data_error("checkpoint " + path.string() +
                     ": bad magic, not a checkpoint file");
  }
  const auto version = in.read_pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw data_error("checkpoint " + path.string() + ": format version " +
                     std::to_string(version) + " is not supported (expected " +
                     std::to_string(kCheckpointVersion) + ")");
  }
  const auto count = in.read_pod<std::uint32_t>();
  if (count > 1'000'000) {
    throw data_error("checkpoint " + path.string() +
                     ": implausible tensor count " + std::to_string(count));
  }

  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name_len = in.read_pod<std::uint32_t>();
    if (name_len > 4096) {
      throw data_error("checkpoint " + path.string() +
                       ": implausible tensor name length");
    }
    std::string name(name_len, '\0');
    in.read_bytes(name.data(), name_len);
    const auto rows = in.read_pod<std::int64_t>();
    const auto cols = in.read_pod<std::int64_t>();
    if (rows < 0 || cols < 0 || (rows > 0 && cols > (1'000'000'000 / rows))) {
      throw data_error("checkpoint " + path.string() + ": tensor '" + name +
                       "' has implausible shape " + std::to_string(rows) +
                       "x" + std::to_string(cols));
    }
    Matrix m(rows, cols);
    for (std::int64_t i = 0; i < rows; ++i) {
      for (std::int64_t j = 0; j < cols; ++j) {
        m(i, j) = in.read_pod<double>();
      }
    }
    tensors.push_back({std::move(name), std::move(m)});
  }
  if (!in.at_end()) {
    throw data_error("checkpoint " + path.string() +
                     ": trailing bytes after the last tensor");
  }
  return tensors;
}

// ---------------------------------------------------------------------------
// Trained-model persistence on top of the named-tensor container.

inline std::vector<NamedTensor> model_to_tensors(const TrainedModel& model) {
  std::vector<NamedTensor> out;
  auto scalar = [&out](const std::string& name, double v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    out.push_back({name, std::move(m)});
  };
  scalar("meta.residual", model.residual ? 1.0 : 0.0);
  scalar("meta.use_highpass", model.use_highpass ? 1.0 : 0.0);
  scalar("meta.hp_alpha", model.encoder.hp_alpha);
  scalar("meta.best_epoch", static_cast<double>(model.best_epoch));
  scalar("meta.best_val_f1", model.best_val_f1);
  const auto& enc = model.encoder;
  for (std::size_t r = 0; r < enc.low.size(); ++r) {
    for (std::size_t l = 0; l < enc.low[r].size(); ++l) {
      out.push_back({"encoder.low." + std::to_string(r) + "." +
                         std::to_string(l),
                     enc.low[r][l]});
    }
  }
  for (std::size_t r = 0; r < enc.high.size(); ++r) {
    for (std::size_t l = 0; l < enc.high[r].size(); ++l) {
      out.push_back({"encoder.high." + std::to_string(r) + "." +
                         std::to_string(l),
                     enc.high[r][l]});
    }
  }
  out.push_back({"head.w1", model.head.w1});
  out.push_back({"head.b1", model.head.b1});
  out.push_back({"head.w2", model.head.w2});
  out.push_back({"head.b2", model.head.b2});
  return out;
}

inline void save_model_checkpoint(const std::filesystem::path& path,
                                  const TrainedModel& model) {
  save_tensors(path, model_to_tensors(model));
}

inline TrainedModel model_from_tensors(const std::vector<NamedTensor>& tensors,
                                       const std::string& origin) {
  std::map<std::string, const Matrix*> by_name;
  for (const NamedTensor& t : tensors) by_name[t.name] = &t.value;

  auto require = [&](const std::string& name) -> const Matrix& {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw data_error("checkpoint " + origin + ": missing tensor '" + name +
                       "'");
    }
    return *it->second;
  };
  auto scalar = [&](const std::string& name) {
    const Matrix& m = require(name);
    if (m.rows() != 1 || m.cols() != 1) {
      throw data_error("checkpoint " + origin + ": '" + name +
                       "' is not a scalar");
    }
    return m(0, 0);
  };

  TrainedModel model;
  model.residual = scalar("meta.residual") != 0.0;
  model.use_highpass = scalar("meta.use_highpass") != 0.0;
  model.best_epoch = static_cast<std::int32_t>(scalar("meta.best_epoch"));
  model.best_val_f1 = scalar("meta.best_val_f1");

  auto collect = [&](const std::string& branch) {
    std::vector<std::vector<Matrix>> weights;
    for (std::int32_t r = 0;; ++r) {
      const std::string first =
          "encoder." + branch + "." + std::to_string(r) + ".0";
      if (!by_name.count(first)) break;
      std::vector<Matrix> layer_weights;
      for (std::int32_t l = 0;; ++l) {
        const std::string name =
            "encoder." + branch + "." + std::to_string(r) + "." +
            std::to_string(l);
        auto it = by_name.find(name);
        if (it == by_name.end()) break;
        layer_weights.push_back(*it->second);
      }
      weights.push_back(std::move(layer_weights));
    }
    return weights;
  };

  model.encoder.low = collect("low");
  model.encoder.high = collect("high");
  if (model.encoder.low.empty()) {
    throw data_error("checkpoint " + origin + ": no encoder weights");
  }
  for (const auto& rel : model.encoder.low) {
    if (rel.size() != model.encoder.low.front().size()) {
      throw data_error("checkpoint " + origin +
                       ": relations disagree on layer count");
    }
  }
  if (model.use_highpass &&
      model.encoder.high.size() != model.encoder.low.size()) {
    throw data_error("checkpoint " + origin +
                     ": sharpen-branch weights do not match relation count");
  }
  if (!model.use_highpass && !model.encoder.high.empty()) {
    throw data_error("checkpoint " + origin +
                     ": sharpen-branch weights present on a smoothing-only "
                     "model");
  }
  model.encoder.layers =
      static_cast<std::int32_t>(model.encoder.low.front().size());
  model.encoder.hidden =
      static_cast<std::int32_t>(model.encoder.low.front().back().cols());
  model.encoder.hp_alpha = scalar("meta.hp_alpha");

  model.head.w1 = require("head.w1");
  model.head.b1 = require("head.b1");
  model.head.w2 = require("head.w2");
  model.head.b2 = require("head.b2");
  return model;
}

inline TrainedModel load_model_checkpoint(const std::filesystem::path& path) {
  return model_from_tensors(load_tensors(path), path.string());
}

}  // namespace cesgad
