#include "checkpoint.hpp"

#include <fstream>

namespace tag {

namespace {
constexpr const char* kMagic = "TAGHEAD-CHECKPOINT";
}

void save_checkpoint(const std::string& path, const ParamStore& params, const nlohmann::json& meta) {
  nlohmann::json tensors = nlohmann::json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.count(); ++i) {
    const Tensor& t = params.tensor(i);
    tensors.push_back({{"name", params.name(i)},
                       {"shape", t.shape()},
                       {"dtype", "f64"},
                       {"offset", offset}});
    offset += t.size() * sizeof(double);
  }
  nlohmann::json manifest = {{"version", 1}, {"meta", meta}, {"tensors", tensors}};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint " + path);
  os << kMagic << "\n" << manifest.dump() << "\n";
  for (std::size_t i = 0; i < params.count(); ++i) {
    const Tensor& t = params.tensor(i);
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!os) throw IoError("failed while writing checkpoint " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path);
  std::string magic, manifest_line;
  if (!std::getline(is, magic) || magic != kMagic)
    throw IoError("checkpoint " + path + " has a bad magic line");
  if (!std::getline(is, manifest_line)) throw IoError("checkpoint " + path + " is truncated");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!manifest.contains("version") || manifest["version"] != 1)
    throw ConfigError("checkpoint version is not supported by this loader");
  CheckpointData out;
  out.meta = manifest.value("meta", nlohmann::json::object());
  std::streampos payload_start = is.tellg();
  for (const auto& entry : manifest.at("tensors")) {
    std::string name = entry.at("name").get<std::string>();
    Shape shape = entry.at("shape").get<Shape>();
    if (entry.at("dtype").get<std::string>() != "f64")
      throw ConfigError("checkpoint tensor '" + name + "' has unsupported dtype");
    std::size_t offset = entry.at("offset").get<std::size_t>();
    Tensor t(shape);
    is.seekg(payload_start + static_cast<std::streamoff>(offset));
    is.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != t.size() * sizeof(double))
      throw IoError("checkpoint payload for '" + name + "' is truncated");
    out.tensors.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

void restore_params(ParamStore& params, const CheckpointData& ckpt) {
  if (ckpt.tensors.size() != params.count())
    throw ShapeError("checkpoint holds " + std::to_string(ckpt.tensors.size()) +
                     " tensors but the model has " + std::to_string(params.count()));
  for (const auto& [name, tensor] : ckpt.tensors) {
    if (!params.has(name)) throw ShapeError("checkpoint tensor '" + name + "' is unknown to the model");
    Tensor& dst = params.at(name);
    if (dst.shape() != tensor.shape())
      throw ShapeError("checkpoint tensor '" + name + "' has shape " + shape_str(tensor.shape()) +
                       ", model expects " + shape_str(dst.shape()));
    dst.values() = tensor.values();
  }
}

}  // namespace tag
