#include "facemotion/motion_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "facemotion/error.hpp"

namespace facemotion {

namespace {

constexpr std::uint32_t kMotionVersion = 1;
constexpr int kModelVersion = 1;

// CSV values are f32 at rest, so they parse straight to the nearest float.
double parse_f32(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  float v = 0.0f;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("csv line " + std::to_string(line) + ": cannot parse value '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_motion(const MotionSequence& motion) {
  detail::ByteWriter w;
  w.magic("A2MO");
  w.u32(kMotionVersion);
  w.f32(static_cast<float>(motion.fps));
  w.u32(static_cast<std::uint32_t>(motion.size()));
  w.u32(static_cast<std::uint32_t>(FlameFrame::kDim));
  for (const auto& f : motion.frames) {
    for (double v : f.values) w.f32(static_cast<float>(v));
  }
  return w.take();
}

MotionSequence decode_motion(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes, "A2MO");
  r.expect_magic("A2MO");
  const auto version = r.u32();
  if (version != kMotionVersion) throw FormatError("A2MO: unsupported version " + std::to_string(version));
  MotionSequence out;
  out.fps = r.f32();
  const auto count = r.u32();
  const auto dim = r.u32();
  if (dim != FlameFrame::kDim) throw FormatError("A2MO: frame dim must be 58, got " + std::to_string(dim));
  if (r.remaining() != static_cast<std::size_t>(count) * dim * 4) throw FormatError("A2MO: payload size mismatch");
  out.frames.resize(count);
  for (auto& f : out.frames) {
    for (double& v : f.values) v = r.f32();
  }
  r.expect_end();
  if (!(out.fps > 0.0)) throw FormatError("A2MO: fps must be positive");
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_file_text(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_file_text(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

void write_motion(const std::filesystem::path& path, const MotionSequence& motion) {
  write_file_bytes(path, encode_motion(motion));
}

MotionSequence read_motion(const std::filesystem::path& path) {
  try {
    return decode_motion(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string motion_to_csv(const MotionSequence& motion) {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "# fps=%.9g\n", static_cast<double>(static_cast<float>(motion.fps)));
  out += buf;
  const auto& names = channel_names();
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (k) out += ',';
    out += names[k];
  }
  out += '\n';
  for (const auto& f : motion.frames) {
    for (std::size_t k = 0; k < FlameFrame::kDim; ++k) {
      if (k) out += ',';
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(f.values[k])));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

MotionSequence motion_from_csv(const std::string& text, double default_fps) {
  MotionSequence out;
  out.fps = default_fps;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("fps=");
      if (pos != std::string::npos) out.fps = parse_f32(std::string_view(line).substr(pos + 4), line_no);
      continue;
    }
    auto cells = split_commas(line);
    if (!have_header) {
      const auto& names = channel_names();
      if (cells.size() != names.size()) {
        throw FormatError("csv header must name 58 channels, found " + std::to_string(cells.size()));
      }
      for (std::size_t k = 0; k < names.size(); ++k) {
        if (cells[k] != names[k]) {
          throw FormatError("csv header column " + std::to_string(k) + " must be '" + names[k] + "'");
        }
      }
      have_header = true;
      continue;
    }
    if (cells.size() != FlameFrame::kDim) {
      throw FormatError("csv line " + std::to_string(line_no) + ": expected 58 values, found " +
                        std::to_string(cells.size()));
    }
    FlameFrame f;
    for (std::size_t k = 0; k < FlameFrame::kDim; ++k) f.values[k] = parse_f32(cells[k], line_no);
    out.frames.push_back(f);
  }
  if (!have_header) throw FormatError("csv motion has no header row");
  if (!(out.fps > 0.0)) throw FormatError("csv motion fps must be positive");
  return out;
}

void write_motion_csv(const std::filesystem::path& path, const MotionSequence& motion) {
  write_file_text(path, motion_to_csv(motion));
}

MotionSequence read_motion_csv(const std::filesystem::path& path, double default_fps) {
  try {
    return motion_from_csv(read_file_text(path), default_fps);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

MotionSequence load_motion_any(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_motion_csv(path);
  return read_motion(path);
}

MotionSequence round_to_f32(const MotionSequence& motion) {
  MotionSequence out = motion;
  out.fps = static_cast<float>(motion.fps);
  for (auto& f : out.frames) {
    for (double& v : f.values) v = static_cast<float>(v);
  }
  return out;
}

nlohmann::json model_to_json(const BlendshapeModel& model) {
  using nlohmann::json;
  json doc;
  doc["format"] = "facemotion-blendshape";
  doc["version"] = kModelVersion;
  doc["num_vertices"] = model.num_vertices();

  json tmpl = json::array();
  for (Eigen::Index i = 0; i < model.template_vertices.rows(); ++i) {
    tmpl.push_back({model.template_vertices(i, 0), model.template_vertices(i, 1), model.template_vertices(i, 2)});
  }
  doc["template"] = std::move(tmpl);

  auto columns = [](const Eigen::MatrixXd& m) {
    json cols = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::vector<double> col(m.rows());
      for (Eigen::Index r = 0; r < m.rows(); ++r) col[r] = m(r, c);
      cols.push_back(col);
    }
    return cols;
  };
  doc["expression_basis"] = columns(model.expression_basis);
  doc["eyelid_basis"] = columns(model.eyelid_basis);
  doc["jaw_joint"] = {model.jaw_joint.x(), model.jaw_joint.y(), model.jaw_joint.z()};
  doc["jaw_region"] = model.jaw_region;
  doc["regions"] = model.regions;
  doc["landmarks"] = model.landmarks;
  return doc;
}

BlendshapeModel model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("format", std::string()) != "facemotion-blendshape") {
      throw FormatError("model document: missing or wrong \"format\" tag");
    }
    if (doc.at("version").get<int>() != kModelVersion) throw FormatError("model document: unsupported version");

    BlendshapeModel model;
    const auto& tmpl = doc.at("template");
    const auto n = static_cast<Eigen::Index>(tmpl.size());
    model.template_vertices.resize(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& v = tmpl.at(i);
      if (v.size() != 3) throw FormatError("model document: template vertex must have 3 coordinates");
      for (int c = 0; c < 3; ++c) model.template_vertices(i, c) = v.at(c).get<double>();
    }

    auto read_columns = [&](const nlohmann::json& cols, Eigen::Index expected_cols, const char* what) {
      if (static_cast<Eigen::Index>(cols.size()) != expected_cols) {
        throw FormatError(std::string("model document: ") + what + " must have " + std::to_string(expected_cols) +
                          " columns");
      }
      Eigen::MatrixXd m(3 * n, expected_cols);
      for (Eigen::Index c = 0; c < expected_cols; ++c) {
        const auto& col = cols.at(c);
        if (static_cast<Eigen::Index>(col.size()) != 3 * n) {
          throw FormatError(std::string("model document: ") + what + " column length must be 3N");
        }
        for (Eigen::Index r = 0; r < 3 * n; ++r) m(r, c) = col.at(r).get<double>();
      }
      return m;
    };
    model.expression_basis = read_columns(doc.at("expression_basis"), FlameFrame::kExpressionDim, "expression_basis");
    model.eyelid_basis = read_columns(doc.at("eyelid_basis"), FlameFrame::kEyelidDim, "eyelid_basis");

    const auto& joint = doc.at("jaw_joint");
    if (joint.size() != 3) throw FormatError("model document: jaw_joint must have 3 coordinates");
    model.jaw_joint = Eigen::Vector3d(joint.at(0).get<double>(), joint.at(1).get<double>(), joint.at(2).get<double>());
    model.jaw_region = doc.at("jaw_region").get<std::vector<std::size_t>>();
    model.regions = doc.at("regions").get<std::map<std::string, std::vector<std::size_t>>>();
    model.landmarks = doc.at("landmarks").get<std::map<std::string, std::size_t>>();
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model document: ") + e.what());
  }
}

void write_model(const std::filesystem::path& path, const BlendshapeModel& model) {
  write_file_text(path, model_to_json(model).dump(1) + "\n");
}

BlendshapeModel read_model(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  try {
    return model_from_json(doc);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace facemotion
