#include "anomdiff/serialize.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <stdexcept>

#include "anomdiff/csv.hpp"
#include "json.hpp"

namespace anomdiff {

namespace {

using json = nlohmann::ordered_json;

void require_little_endian() {
  if constexpr (std::endian::native != std::endian::little) {
    throw std::runtime_error("tensor container requires a little-endian host");
  }
}

json report_fields(const EvaluationReport& r) {
  json j;
  j["n_trajs"] = r.n_trajs;
  j["rmse_cp"] = r.rmse_cp;
  j["jsc_cp"] = r.jsc_cp;
  j["alpha_mae"] = r.mae_alpha;
  j["k_msle"] = r.msle_k;
  j["state_f1"] = r.f1_state;
  j["alpha_w1"] = r.w1_alpha;
  j["k_w1"] = r.w1_k;
  j["alpha_w1_unrestricted"] = r.w1_alpha_unrestricted;
  j["k_w1_unrestricted"] = r.w1_k_unrestricted;
  j["msle_clamped"] = r.msle_clamped;
  return j;
}

std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04d.pgm", index);
  return buf;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string checksum_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
  return buf;
}

std::string checksum_file(const std::string& path) { return checksum_hex(read_file(path)); }

void write_fov_tensor(const std::string& path, const FovTensor& tensor) {
  require_little_endian();
  json header;
  header["format"] = "anomdiff-tensor";
  header["version"] = 1;
  header["dtype"] = "float64";
  header["order"] = "row-major";
  header["shape"] = {FovTensor::kRows, FovTensor::kFrames, FovTensor::kAxes};
  header["fov_id"] = tensor.fov_id;
  json occ = json::array(), start = json::array(), len = json::array(), ids = json::array();
  for (int r = 0; r < FovTensor::kRows; ++r) {
    occ.push_back(tensor.occupancy[r] ? 1 : 0);
    start.push_back(tensor.row_start[r]);
    len.push_back(tensor.row_len[r]);
    ids.push_back(tensor.traj_id[r]);
  }
  header["occupancy"] = std::move(occ);
  header["row_start"] = std::move(start);
  header["row_len"] = std::move(len);
  header["traj_id"] = std::move(ids);

  std::string out = header.dump();
  out.push_back('\n');
  const auto& values = tensor.data();
  std::size_t payload = values.size() * sizeof(double);
  std::size_t text = out.size();
  out.resize(text + payload);
  std::memcpy(out.data() + text, values.data(), payload);
  write_file(path, out);
}

FovTensor read_fov_tensor(const std::string& path) {
  require_little_endian();
  std::string raw = read_file(path);
  std::size_t nl = raw.find('\n');
  if (nl == std::string::npos) throw std::runtime_error(path + ": missing tensor header");
  json header;
  try {
    header = json::parse(raw.substr(0, nl));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": bad tensor header: " + e.what());
  }
  if (header.value("format", "") != std::string("anomdiff-tensor") ||
      header.value("dtype", "") != std::string("float64")) {
    throw std::runtime_error(path + ": not an anomdiff tensor file");
  }
  auto shape = header.at("shape");
  if (shape.size() != 3 || shape[0] != FovTensor::kRows || shape[1] != FovTensor::kFrames ||
      shape[2] != FovTensor::kAxes) {
    throw std::runtime_error(path + ": unexpected tensor shape");
  }

  FovTensor tensor;
  tensor.fov_id = header.value("fov_id", -1);
  auto occ = header.at("occupancy");
  auto start = header.at("row_start");
  auto len = header.at("row_len");
  auto ids = header.at("traj_id");
  if (occ.size() != FovTensor::kRows || start.size() != FovTensor::kRows ||
      len.size() != FovTensor::kRows || ids.size() != FovTensor::kRows) {
    throw std::runtime_error(path + ": row metadata length mismatch");
  }
  for (int r = 0; r < FovTensor::kRows; ++r) {
    tensor.occupancy[r] = occ[r].get<int>() != 0;
    tensor.row_start[r] = start[r].get<int>();
    tensor.row_len[r] = len[r].get<int>();
    tensor.traj_id[r] = ids[r].get<int>();
  }

  std::size_t payload = tensor.data().size() * sizeof(double);
  if (raw.size() - nl - 1 != payload) {
    throw std::runtime_error(path + ": tensor payload size mismatch");
  }
  std::memcpy(tensor.data().data(), raw.data() + nl + 1, payload);
  return tensor;
}

void write_frame_stack(const std::string& dir, const FrameStack& stack, int fov_id,
                       const RenderConfig& render) {
  std::filesystem::create_directories(dir);
  json index;
  index["fov_id"] = fov_id;
  index["n_frames"] = stack.n_frames;
  index["height"] = stack.height;
  index["width"] = stack.width;
  json rj;
  rj["psf_sigma"] = render.psf_sigma;
  rj["particle_intensity"] = render.particle_intensity;
  rj["background"] = render.background;
  rj["noise_sigma"] = render.noise_sigma;
  rj["bit_depth"] = render.bit_depth;
  index["render"] = std::move(rj);

  json frames = json::array();
  json checksums;
  for (int f = 0; f < stack.n_frames; ++f) {
    std::string name = frame_name(f);
    std::string path = dir + "/" + name;
    write_pgm(path, stack.frame(f));
    frames.push_back(name);
    checksums[name] = checksum_file(path);
  }
  index["frames"] = std::move(frames);
  index["checksums"] = std::move(checksums);
  write_file(dir + "/index.json", index.dump(2) + "\n");
}

FrameStack read_frame_stack(const std::string& dir) {
  json index;
  try {
    index = json::parse(read_file(dir + "/index.json"));
  } catch (const std::exception& e) {
    throw std::runtime_error(dir + "/index.json: " + e.what());
  }
  FrameStack stack;
  stack.n_frames = index.at("n_frames").get<int>();
  stack.height = index.at("height").get<int>();
  stack.width = index.at("width").get<int>();
  auto frames = index.at("frames");
  if (static_cast<int>(frames.size()) != stack.n_frames) {
    throw std::runtime_error(dir + "/index.json: frame list length mismatch");
  }
  stack.data.resize(static_cast<std::size_t>(stack.n_frames) * stack.height * stack.width);
  for (int f = 0; f < stack.n_frames; ++f) {
    std::string path = dir + "/" + frames[f].get<std::string>();
    GrayImage img = read_pgm(path);
    if (img.width != stack.width || img.height != stack.height) {
      throw std::runtime_error(path + ": frame geometry mismatch");
    }
    std::memcpy(stack.data.data() + static_cast<std::size_t>(f) * stack.height * stack.width,
                img.pixels.data(), img.pixels.size());
  }
  return stack;
}

std::string ensemble_to_json(const EnsembleSummary& summary) {
  json j;
  j["n_states"] = summary.n_states;
  j["collapsed"] = summary.collapsed;
  json clusters = json::array();
  for (const auto& c : summary.clusters) {
    json cj;
    cj["mean_alpha"] = c.mean_alpha;
    cj["std_alpha"] = c.std_alpha;
    cj["mean_k"] = c.mean_k;
    cj["std_k"] = c.std_k;
    cj["weight"] = c.weight;
    clusters.push_back(std::move(cj));
  }
  j["clusters"] = std::move(clusters);
  return j.dump(2) + "\n";
}

std::string report_to_json(const std::vector<ExperimentReport>& experiments,
                           const EvaluationReport& combined, const std::string& config_json,
                           const InputChecksums& inputs) {
  json root;
  if (config_json.empty()) {
    root["config"] = json::object();
  } else {
    try {
      root["config"] = json::parse(config_json);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("config echo is not valid JSON: ") + e.what());
    }
  }
  json in = json::object();
  for (const auto& [name, digest] : inputs) in[name] = digest;
  root["inputs"] = std::move(in);
  json exps = json::array();
  for (const auto& e : experiments) {
    json ej;
    ej["exp"] = e.name;
    ej.update(report_fields(e.report));
    exps.push_back(std::move(ej));
  }
  root["experiments"] = std::move(exps);
  root["combined"] = report_fields(combined);
  return root.dump(2) + "\n";
}

std::string report_to_csv(const std::vector<ExperimentReport>& experiments) {
  std::string out = "exp,n_trajs,rmse_cp,jsc_cp,alpha_mae,k_msle,state_f1,alpha_w1,k_w1\n";
  for (const auto& e : experiments) {
    const auto& r = e.report;
    out += e.name;
    out += ',' + std::to_string(r.n_trajs);
    out += ',' + format_double(r.rmse_cp);
    out += ',' + format_double(r.jsc_cp);
    out += ',' + format_double(r.mae_alpha);
    out += ',' + format_double(r.msle_k);
    out += ',' + format_double(r.f1_state);
    out += ',' + format_double(r.w1_alpha);
    out += ',' + format_double(r.w1_k);
    out += '\n';
  }
  return out;
}

}  // namespace anomdiff
