// Copyright 2026 The DMC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "dmc/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "dmc/errors.hpp"

namespace dmc::io {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace {

constexpr std::array<char, 4> kSceneMagic{'D', 'M', 'C', 'S'};
constexpr std::array<char, 4> kModelMagic{'D', 'M', 'C', 'M'};

// Upper bound on any single length field, guards against garbage headers.
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 32;

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  template <typename T>
  void put(T v) {
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const char* data, std::size_t n) { os_.write(data, static_cast<std::streamsize>(n)); }
  void doubles(const double* data, std::size_t n) {
    os_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  template <typename T>
  T get() {
    T v{};
    read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
  }
  std::uint64_t length() {
    const auto n = get<std::uint64_t>();
    if (n > kMaxLength) throw IoError("corrupt file: implausible length field");
    return n;
  }
  void read(char* data, std::size_t n) {
    is_.read(data, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n) throw IoError("unexpected end of file");
  }
  void doubles(double* data, std::size_t n) { read(reinterpret_cast<char*>(data), n * sizeof(double)); }

 private:
  std::istream& is_;
};

void check_magic(Reader& r, const std::array<char, 4>& magic, std::uint32_t version,
                 const char* what) {
  std::array<char, 4> got{};
  r.read(got.data(), got.size());
  if (got != magic) throw IoError(fmt::format("not a {} file (bad magic)", what));
  const auto v = r.get<std::uint32_t>();
  if (v != version) {
    throw IoError(fmt::format("unsupported {} file version {} (expected {})", what, v, version));
  }
}

void write_grid_dims(Writer& w, const RawGrid& g) {
  w.put<std::uint64_t>(g.height);
  w.put<std::uint64_t>(g.width);
  w.put<std::uint64_t>(g.channels);
}

RawGrid read_grid_dims(Reader& r, Modality modality) {
  const auto h = r.length();
  const auto wd = r.length();
  const auto c = r.length();
  if (h * wd * c > kMaxLength) throw IoError("corrupt scene file: grid too large");
  return RawGrid(h, wd, c, modality);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  return is;
}

}  // namespace

void write_scene(std::ostream& os, const ScenePair& scene) {
  Writer w(os);
  w.bytes(kSceneMagic.data(), kSceneMagic.size());
  w.put<std::uint32_t>(kSceneVersion);
  w.put<std::uint64_t>(scene.seed);
  write_grid_dims(w, scene.visual);
  write_grid_dims(w, scene.audio);
  w.put<std::uint64_t>(scene.visual_grid.rows);
  w.put<std::uint64_t>(scene.visual_grid.cols);
  w.put<std::uint64_t>(scene.audio_grid.rows);
  w.put<std::uint64_t>(scene.audio_grid.cols);
  w.put<std::uint64_t>(scene.components.size());
  for (const ComponentSignature& c : scene.components) {
    w.put<std::int32_t>(c.id);
    w.put<std::uint8_t>(c.silent ? 1 : 0);
    w.put<double>(c.amplitude);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(c.latent.size()));
    w.doubles(c.latent.data(), static_cast<std::size_t>(c.latent.size()));
    w.put<std::int32_t>(c.visual_blob.row);
    w.put<std::int32_t>(c.visual_blob.col);
    w.put<std::int32_t>(c.visual_blob.radius);
    w.put<std::int32_t>(c.audio_blob.t_begin);
    w.put<std::int32_t>(c.audio_blob.t_end);
    w.put<std::int32_t>(c.audio_blob.f_begin);
    w.put<std::int32_t>(c.audio_blob.f_end);
  }
  w.doubles(scene.visual.values.data(), scene.visual.values.size());
  w.doubles(scene.audio.values.data(), scene.audio.values.size());
  for (std::size_t c = 0; c < scene.components.size(); ++c) {
    w.bytes(reinterpret_cast<const char*>(scene.visual_masks[c].data()), scene.visual_masks[c].size());
    w.bytes(reinterpret_cast<const char*>(scene.audio_masks[c].data()), scene.audio_masks[c].size());
  }
  if (!os) throw IoError("failed writing scene");
}

ScenePair read_scene(std::istream& is) {
  Reader r(is);
  check_magic(r, kSceneMagic, kSceneVersion, "scene");
  ScenePair scene;
  scene.seed = r.get<std::uint64_t>();
  scene.visual = read_grid_dims(r, Modality::kVisual);
  scene.audio = read_grid_dims(r, Modality::kAudio);
  scene.visual_grid = {r.length(), r.length()};
  scene.audio_grid = {r.length(), r.length()};
  const auto count = r.length();
  for (std::uint64_t i = 0; i < count; ++i) {
    ComponentSignature c;
    c.id = r.get<std::int32_t>();
    c.silent = r.get<std::uint8_t>() != 0;
    c.amplitude = r.get<double>();
    c.latent.resize(static_cast<Eigen::Index>(r.length()));
    r.doubles(c.latent.data(), static_cast<std::size_t>(c.latent.size()));
    c.visual_blob.row = r.get<std::int32_t>();
    c.visual_blob.col = r.get<std::int32_t>();
    c.visual_blob.radius = r.get<std::int32_t>();
    c.audio_blob.t_begin = r.get<std::int32_t>();
    c.audio_blob.t_end = r.get<std::int32_t>();
    c.audio_blob.f_begin = r.get<std::int32_t>();
    c.audio_blob.f_end = r.get<std::int32_t>();
    scene.components.push_back(std::move(c));
  }
  r.doubles(scene.visual.values.data(), scene.visual.values.size());
  r.doubles(scene.audio.values.data(), scene.audio.values.size());
  for (std::uint64_t i = 0; i < count; ++i) {
    Mask vm(scene.visual_grid.count());
    Mask am(scene.audio_grid.count());
    r.read(reinterpret_cast<char*>(vm.data()), vm.size());
    r.read(reinterpret_cast<char*>(am.data()), am.size());
    scene.visual_masks.push_back(std::move(vm));
    scene.audio_masks.push_back(std::move(am));
  }
  return scene;
}

void save_scene(const std::filesystem::path& path, const ScenePair& scene) {
  auto os = open_out(path);
  write_scene(os, scene);
}

ScenePair load_scene(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_scene(is);
}

void write_model(std::ostream& os, const Model& model) {
  Writer w(os);
  w.bytes(kModelMagic.data(), kModelMagic.size());
  w.put<std::uint32_t>(kModelVersion);
  const ModelConfig& c = model.config;
  for (std::size_t v : {c.visual_patch, c.visual_channels, c.audio_patch, c.feature_dim,
                        c.center_dim, c.cluster.k, c.cluster.iterations}) {
    w.put<std::uint64_t>(v);
  }
  w.put<double>(c.cluster.z);
  w.put<double>(c.projection_gain);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(model.visual.nonlinearity));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(model.audio.nonlinearity));
  const auto blocks = model.blocks();
  w.put<std::uint64_t>(blocks.size());
  for (const auto& b : blocks) {
    w.put<std::uint64_t>(b.values.size());
    w.doubles(b.values.data(), b.values.size());
  }
  if (!os) throw IoError("failed writing model");
}

Model read_model(std::istream& is) {
  Reader r(is);
  check_magic(r, kModelMagic, kModelVersion, "model");
  ModelConfig c;
  c.visual_patch = r.length();
  c.visual_channels = r.length();
  c.audio_patch = r.length();
  c.feature_dim = r.length();
  c.center_dim = r.length();
  c.cluster.k = r.length();
  c.cluster.iterations = r.length();
  c.cluster.z = r.get<double>();
  c.projection_gain = r.get<double>();
  const auto visual_nl = r.get<std::uint8_t>();
  const auto audio_nl = r.get<std::uint8_t>();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw IoError(std::string("corrupt model header: ") + e.what());
  }
  if (visual_nl > 1 || audio_nl > 1) throw IoError("corrupt model header: bad nonlinearity");

  Model model = Model::init(c, 0);
  model.visual.nonlinearity = static_cast<Nonlinearity>(visual_nl);
  model.audio.nonlinearity = static_cast<Nonlinearity>(audio_nl);
  auto blocks = model.blocks();
  if (r.length() != blocks.size()) throw IoError("model block count does not match its header");
  for (auto& b : blocks) {
    if (r.length() != b.values.size()) throw IoError("model block " + b.name + " has wrong size");
    r.doubles(b.values.data(), b.values.size());
  }
  return model;
}

void save_model(const std::filesystem::path& path, const Model& model) {
  auto os = open_out(path);
  write_model(os, model);
}

Model load_model(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_model(is);
}

void write_dataset(const std::filesystem::path& dir, const std::vector<ScenePair>& scenes) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  auto manifest = open_out(dir / kManifestName);
  manifest << "index,seed,file,components,silent\n";
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const std::string file = fmt::format("scene_{:06d}.bin", i);
    save_scene(dir / file, scenes[i]);
    const auto silent = std::count_if(scenes[i].components.begin(), scenes[i].components.end(),
                                      [](const ComponentSignature& c) { return c.silent; });
    manifest << fmt::format("{},{},{},{},{}\n", i, scenes[i].seed, file,
                            scenes[i].components.size(), silent);
  }
  if (!manifest) throw IoError("failed writing manifest in " + dir.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir) {
  auto is = open_in(dir / kManifestName);
  std::string line;
  if (!std::getline(is, line) || line != "index,seed,file,components,silent") {
    throw IoError("manifest has an unexpected header: " + (dir / kManifestName).string());
  }
  std::vector<ManifestEntry> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    ManifestEntry e;
    std::string cell;
    try {
      std::getline(fields, cell, ',');
      e.index = std::stoull(cell);
      std::getline(fields, cell, ',');
      e.seed = std::stoull(cell);
      std::getline(fields, e.file, ',');
      std::getline(fields, cell, ',');
      e.components = std::stoull(cell);
      std::getline(fields, cell, ',');
      e.silent = std::stoull(cell);
    } catch (const std::logic_error&) {
      throw IoError("malformed manifest line: " + line);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ScenePair> read_dataset(const std::filesystem::path& dir) {
  std::vector<ScenePair> scenes;
  for (const ManifestEntry& e : read_manifest(dir)) scenes.push_back(load_scene(dir / e.file));
  return scenes;
}

void write_pgm(std::ostream& os, GridShape grid, const std::vector<double>& values) {
  if (values.size() != grid.count()) throw ShapeError("write_pgm: value count does not match grid");
  os << "P5\n" << grid.cols << ' ' << grid.rows << "\n255\n";
  for (double v : values) {
    const auto px = static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
    os.put(static_cast<char>(px));
  }
  if (!os) throw IoError("failed writing PGM");
}

void save_pgm(const std::filesystem::path& path, GridShape grid, const std::vector<double>& values) {
  auto os = open_out(path);
  write_pgm(os, grid, values);
}

}  // namespace dmc::io
