#include "marrq/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace marrq {

namespace {

static_assert(std::endian::native == std::endian::little,
              "blob writer assumes a little-endian host");

void write_f32_blob(std::ofstream& out, const DenseMatrix& m) {
  std::vector<float> buf(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) buf[i] = static_cast<float>(m.data()[i]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

DenseMatrix read_f32_blob(const std::string& path, std::size_t offset,
                          std::size_t rows, std::size_t cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open blob file: " + path);
  in.seekg(static_cast<std::streamoff>(offset));
  std::vector<float> buf(rows * cols);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!in) throw std::runtime_error("blob file truncated: " + path);
  std::vector<double> wide(buf.begin(), buf.end());
  return DenseMatrix(rows, cols, std::move(wide));
}

nlohmann::ordered_json make_manifest(const std::string& blob_name) {
  nlohmann::ordered_json j;
  j["format"] = "marrq-tensors-v1";
  j["blob"] = blob_name;
  j["modules"] = nlohmann::ordered_json::array();
  return j;
}

nlohmann::ordered_json load_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
  nlohmann::ordered_json j;
  in >> j;
  if (j.value("format", "") != std::string("marrq-tensors-v1")) {
    throw std::runtime_error("unrecognized manifest format in " + manifest_path);
  }
  return j;
}

std::string sibling_path(const std::string& manifest_path, const std::string& name) {
  return (std::filesystem::path(manifest_path).parent_path() / name).string();
}

}  // namespace

std::string blob_path_for(const std::string& manifest_path) {
  std::filesystem::path p(manifest_path);
  p.replace_extension(".bin");
  return p.string();
}

void save_network(const NetworkSpec& net, const std::string& manifest_path) {
  net.validate();
  const std::string blob = blob_path_for(manifest_path);
  nlohmann::ordered_json j = make_manifest(std::filesystem::path(blob).filename().string());
  j["input_dim"] = net.input_dim;

  std::ofstream bout(blob, std::ios::binary | std::ios::trunc);
  if (!bout) throw std::runtime_error("cannot write blob file: " + blob);
  std::size_t offset = 0;
  for (const ModuleSpec& m : net.modules) {
    nlohmann::ordered_json e;
    e["name"] = m.name;
    e["rows"] = m.weight.rows();
    e["cols"] = m.weight.cols();
    e["offset"] = offset;
    e["activation"] = to_string(m.activation_after);
    j["modules"].push_back(e);
    write_f32_blob(bout, m.weight);
    offset += m.weight.size() * sizeof(float);
  }
  bout.close();

  std::ofstream mout(manifest_path, std::ios::trunc);
  if (!mout) throw std::runtime_error("cannot write manifest: " + manifest_path);
  mout << j.dump(2) << "\n";
}

NetworkSpec load_network(const std::string& manifest_path) {
  const nlohmann::ordered_json j = load_manifest(manifest_path);
  const std::string blob = sibling_path(manifest_path, j.at("blob").get<std::string>());
  NetworkSpec net;
  net.input_dim = j.at("input_dim").get<std::size_t>();
  for (const auto& e : j.at("modules")) {
    ModuleSpec m;
    m.name = e.at("name").get<std::string>();
    m.weight = read_f32_blob(blob, e.at("offset").get<std::size_t>(),
                             e.at("rows").get<std::size_t>(),
                             e.at("cols").get<std::size_t>());
    m.activation_after = activation_from_string(e.at("activation").get<std::string>());
    net.modules.push_back(std::move(m));
  }
  net.validate();
  return net;
}

void save_calibration(const CalibrationSet& calib, const std::string& manifest_path) {
  const std::string blob = blob_path_for(manifest_path);
  nlohmann::ordered_json j = make_manifest(std::filesystem::path(blob).filename().string());
  j["seed"] = calib.seed;
  nlohmann::ordered_json e;
  e["name"] = "calib";
  e["rows"] = calib.inputs.rows();
  e["cols"] = calib.inputs.cols();
  e["offset"] = 0;
  e["activation"] = "none";
  j["modules"].push_back(e);

  std::ofstream bout(blob, std::ios::binary | std::ios::trunc);
  if (!bout) throw std::runtime_error("cannot write blob file: " + blob);
  write_f32_blob(bout, calib.inputs);
  bout.close();

  std::ofstream mout(manifest_path, std::ios::trunc);
  if (!mout) throw std::runtime_error("cannot write manifest: " + manifest_path);
  mout << j.dump(2) << "\n";
}

CalibrationSet load_calibration(const std::string& manifest_path) {
  const nlohmann::ordered_json j = load_manifest(manifest_path);
  const std::string blob = sibling_path(manifest_path, j.at("blob").get<std::string>());
  const auto& e = j.at("modules").at(0);
  CalibrationSet calib;
  calib.seed = j.value("seed", std::uint64_t{0});
  calib.inputs = read_f32_blob(blob, e.at("offset").get<std::size_t>(),
                               e.at("rows").get<std::size_t>(),
                               e.at("cols").get<std::size_t>());
  return calib;
}

}  // namespace marrq
