#include "aslks/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace aslks {

namespace {

using ojson = nlohmann::ordered_json;

void write_bytes(std::ostream& out, const void* p, std::size_t len) {
  out.write(static_cast<const char*>(p), std::streamsize(len));
}

void read_bytes(std::istream& in, void* p, std::size_t len) {
  in.read(static_cast<char*>(p), std::streamsize(len));
  if (!in) throw ParseError("tensor container: truncated stream");
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  write_bytes(out, b, 4);
}

std::uint32_t read_u32_le(std::istream& in) {
  unsigned char b[4];
  read_bytes(in, b, 4);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
         (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

template <typename T>
void write_scalar_le(std::ostream& out, T v) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  if constexpr (sizeof(T) == 4) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32_le(out, bits);
  } else {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u32_le(out, std::uint32_t(bits));
    write_u32_le(out, std::uint32_t(bits >> 32));
  }
}

template <typename T>
T read_scalar_le(std::istream& in) {
  T v;
  if constexpr (sizeof(T) == 4) {
    std::uint32_t bits = read_u32_le(in);
    std::memcpy(&v, &bits, 4);
  } else {
    std::uint64_t lo = read_u32_le(in);
    std::uint64_t hi = read_u32_le(in);
    std::uint64_t bits = lo | (hi << 32);
    std::memcpy(&v, &bits, 8);
  }
  return v;
}

}  // namespace

template <typename T>
void save_tensor(std::ostream& out, const Tensor4<T>& t) {
  write_bytes(out, "T4", 2);
  const unsigned char tag = t.dtype() == DType::f32 ? 0 : 1;
  write_bytes(out, &tag, 1);
  write_u32_le(out, std::uint32_t(t.n));
  write_u32_le(out, std::uint32_t(t.c));
  write_u32_le(out, std::uint32_t(t.h));
  write_u32_le(out, std::uint32_t(t.w));
  for (const T& v : t.data) write_scalar_le(out, v);
}

namespace {

template <typename T>
Tensor4<T> read_payload(std::istream& in, int n, int c, int h, int w) {
  Tensor4<T> t(n, c, h, w);
  for (auto& v : t.data) v = read_scalar_le<T>(in);
  return t;
}

}  // namespace

AnyTensor load_tensor(std::istream& in) {
  char magic[2];
  read_bytes(in, magic, 2);
  if (magic[0] != 'T' || magic[1] != '4')
    throw ParseError("tensor container: bad magic");
  unsigned char tag;
  read_bytes(in, &tag, 1);
  if (tag > 1) throw ParseError("tensor container: unknown dtype tag");
  const int n = int(read_u32_le(in));
  const int c = int(read_u32_le(in));
  const int h = int(read_u32_le(in));
  const int w = int(read_u32_le(in));
  if (n < 1 || c < 1 || h < 1 || w < 1)
    throw ParseError("tensor container: zero-sized axis");
  constexpr int kMaxAxis = 1 << 24;
  if (n > kMaxAxis || c > kMaxAxis || h > kMaxAxis || w > kMaxAxis)
    throw ParseError("tensor container: implausible axis extent");
  if (tag == 0) return read_payload<float>(in, n, c, h, w);
  return read_payload<double>(in, n, c, h, w);
}

template <typename T>
Tensor4<T> load_tensor_as(std::istream& in) {
  AnyTensor t = load_tensor(in);
  if (!std::holds_alternative<Tensor4<T>>(t))
    throw ParseError("tensor container: dtype does not match the requested type");
  return std::get<Tensor4<T>>(std::move(t));
}

template <typename T>
void save_tensor_pack(
    const std::string& path,
    const std::vector<std::pair<std::string, const Tensor4<T>*>>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  write_bytes(out, "T4PK", 4);
  write_u32_le(out, std::uint32_t(entries.size()));
  for (const auto& [name, tensor] : entries) {
    write_u32_le(out, std::uint32_t(name.size()));
    write_bytes(out, name.data(), name.size());
    save_tensor(out, *tensor);
  }
}

template <typename T>
std::map<std::string, Tensor4<T>> load_tensor_pack(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  char magic[4];
  read_bytes(in, magic, 4);
  if (std::memcmp(magic, "T4PK", 4) != 0)
    throw ParseError("tensor pack: bad magic in '" + path + "'");
  const std::uint32_t count = read_u32_le(in);
  std::map<std::string, Tensor4<T>> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = read_u32_le(in);
    std::string name(len, '\0');
    read_bytes(in, name.data(), len);
    entries.emplace(std::move(name), load_tensor_as<T>(in));
  }
  return entries;
}

// --- ASC parameter container --------------------------------------------------

template <typename T>
void save_asc_params(const std::string& path, const AscParams<T>& p) {
  p.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  write_bytes(out, "ASCP", 4);
  write_u32_le(out, 1);  // version
  const AscSpec& s = p.spec;
  for (int v : {s.c_in, s.c_out, s.kh, s.kw, s.groups, s.stride, s.pad_h,
                s.pad_w})
    write_u32_le(out, std::uint32_t(v));
  const ConvSpec& g = p.generator.spec;
  for (int v : {g.c_in, g.c_out, g.kh, g.kw, g.stride, g.pad_h, g.pad_w,
                g.groups, int(g.has_bias)})
    write_u32_le(out, std::uint32_t(v));

  const int cig = s.c_in / s.groups;
  Tensor4<T> base(s.c_out, cig, s.kh, s.kw);
  base.data = p.base_weights;
  save_tensor(out, base);

  Tensor4<T> gw(g.c_out, g.c_in / g.groups, g.kh, g.kw);
  gw.data = p.generator.weights;
  save_tensor(out, gw);
  if (g.has_bias) {
    Tensor4<T> gb(1, 1, 1, g.c_out);
    gb.data = p.generator.bias;
    save_tensor(out, gb);
  }
  for (const auto* arr : {&p.bn.scale, &p.bn.shift, &p.bn.mean, &p.bn.var}) {
    Tensor4<T> t(1, 1, 1, s.c_out);
    t.data = *arr;
    save_tensor(out, t);
  }
}

template <typename T>
AscParams<T> load_asc_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  char magic[4];
  read_bytes(in, magic, 4);
  if (std::memcmp(magic, "ASCP", 4) != 0)
    throw ParseError("asc params: bad magic in '" + path + "'");
  if (read_u32_le(in) != 1) throw ParseError("asc params: unknown version");

  AscParams<T> p;
  AscSpec& s = p.spec;
  s.c_in = int(read_u32_le(in));
  s.c_out = int(read_u32_le(in));
  s.kh = int(read_u32_le(in));
  s.kw = int(read_u32_le(in));
  s.groups = int(read_u32_le(in));
  s.stride = int(read_u32_le(in));
  s.pad_h = int(read_u32_le(in));
  s.pad_w = int(read_u32_le(in));
  ConvSpec& g = p.generator.spec;
  g.c_in = int(read_u32_le(in));
  g.c_out = int(read_u32_le(in));
  g.kh = int(read_u32_le(in));
  g.kw = int(read_u32_le(in));
  g.stride = int(read_u32_le(in));
  g.pad_h = int(read_u32_le(in));
  g.pad_w = int(read_u32_le(in));
  g.groups = int(read_u32_le(in));
  g.has_bias = read_u32_le(in) != 0;

  p.base_weights = load_tensor_as<T>(in).data;
  p.generator.weights = load_tensor_as<T>(in).data;
  if (g.has_bias) p.generator.bias = load_tensor_as<T>(in).data;
  p.bn.scale = load_tensor_as<T>(in).data;
  p.bn.shift = load_tensor_as<T>(in).data;
  p.bn.mean = load_tensor_as<T>(in).data;
  p.bn.var = load_tensor_as<T>(in).data;
  p.validate();
  return p;
}

// --- LKSC plan -----------------------------------------------------------------

template <typename T>
void save_lksc_plan(const std::string& json_path,
                    const std::string& container_path, const LkscPlan<T>& p) {
  std::vector<std::pair<std::string, const Tensor4<T>*>> entries;
  std::vector<Tensor4<T>> storage;
  storage.reserve(3 + 2 + 4);
  std::vector<std::string> branch_names;
  for (const auto& b : p.branches) {
    Tensor4<T> t(b.channels, 1, b.rows, b.cols);
    t.data = b.weights;
    storage.push_back(std::move(t));
    branch_names.push_back(std::string(branch_kind_name(b.kind)) + "/weights");
  }
  Tensor4<T> pw(p.spec.channels, p.spec.channels, 1, 1);
  pw.data = p.pointwise.weights;
  storage.push_back(std::move(pw));
  Tensor4<T> pb(1, 1, 1, p.spec.channels);
  pb.data = p.pointwise.bias;
  storage.push_back(std::move(pb));
  for (const auto* arr : {&p.bn.scale, &p.bn.shift, &p.bn.mean, &p.bn.var}) {
    Tensor4<T> t(1, 1, 1, p.spec.channels);
    t.data = *arr;
    storage.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < 3; ++i)
    entries.emplace_back(branch_names[i], &storage[i]);
  entries.emplace_back("pointwise/weights", &storage[3]);
  entries.emplace_back("pointwise/bias", &storage[4]);
  const char* bn_names[] = {"bn/scale", "bn/shift", "bn/mean", "bn/var"};
  for (std::size_t i = 0; i < 4; ++i)
    entries.emplace_back(bn_names[i], &storage[5 + i]);
  save_tensor_pack(container_path, entries);

  ojson doc;
  doc["format"] = "aslks-lksc-plan";
  doc["version"] = 1;
  doc["dtype"] = dtype_name(Tensor4<T>::dtype());
  doc["container"] =
      std::filesystem::path(container_path).filename().string();
  doc["spec"] = {{"channels", p.spec.channels}, {"kh", p.spec.kh},
                 {"kw", p.spec.kw},             {"tile", p.spec.tile},
                 {"stride", p.spec.stride}};
  ojson branches = ojson::array();
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& b = p.branches[i];
    ojson jb;
    jb["kind"] = branch_kind_name(b.kind);
    jb["rows"] = b.rows;
    jb["cols"] = b.cols;
    jb["padded_rows"] = b.padded_rows;
    jb["padded_cols"] = b.padded_cols;
    jb["anchor"] = {b.anchor_y, b.anchor_x};
    jb["weights"] = branch_names[i];
    ojson tiles = ojson::array();
    for (const auto& t : b.tiles)
      tiles.push_back({{"index", t.index}, {"dy", t.dy}, {"dx", t.dx}});
    jb["tiles"] = std::move(tiles);
    branches.push_back(std::move(jb));
  }
  doc["branches"] = std::move(branches);
  doc["pointwise"] = {{"weights", "pointwise/weights"},
                      {"bias", "pointwise/bias"}};
  doc["bn"] = {{"scale", "bn/scale"},
               {"shift", "bn/shift"},
               {"mean", "bn/mean"},
               {"var", "bn/var"}};

  std::ofstream out(json_path);
  if (!out) throw ParseError("cannot open '" + json_path + "' for writing");
  out << doc.dump(2) << "\n";
}

template <typename T>
LkscPlan<T> load_lksc_plan(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw ParseError("cannot open '" + json_path + "'");
  ojson doc;
  try {
    doc = ojson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("lksc plan: " + std::string(e.what()));
  }
  if (doc.value("format", "") != "aslks-lksc-plan")
    throw ParseError("lksc plan: unexpected format field");
  if (doc.value("dtype", "") != dtype_name(Tensor4<T>::dtype()))
    throw ParseError("lksc plan: dtype mismatch");

  const std::string container =
      (std::filesystem::path(json_path).parent_path() /
       doc.at("container").get<std::string>())
          .string();
  auto pack = load_tensor_pack<T>(container);
  auto tensor = [&](const std::string& name) -> Tensor4<T>& {
    auto it = pack.find(name);
    if (it == pack.end())
      throw ParseError("lksc plan: container is missing tensor '" + name +
                       "'");
    return it->second;
  };

  LkscSpec spec;
  const ojson& js = doc.at("spec");
  spec.channels = js.at("channels").get<int>();
  spec.kh = js.at("kh").get<int>();
  spec.kw = js.at("kw").get<int>();
  spec.tile = js.at("tile").get<int>();
  spec.stride = js.at("stride").get<int>();

  std::array<std::vector<T>, 3> weights;
  const char* kinds[] = {"vertical", "horizontal", "core"};
  for (int i = 0; i < 3; ++i) {
    const ojson& jb = doc.at("branches").at(i);
    if (jb.at("kind").get<std::string>() != kinds[i])
      throw ParseError("lksc plan: branch " + std::to_string(i) +
                       " must be '" + kinds[i] + "'");
    weights[i] = tensor(jb.at("weights").get<std::string>()).data;
  }
  LkscPlan<T> plan = plan_lksc<T>(
      spec, std::span<const T>(weights[0]), std::span<const T>(weights[1]),
      std::span<const T>(weights[2]));

  // The stored tile table must agree with the replanned schedule.
  for (int i = 0; i < 3; ++i) {
    const ojson& jt = doc.at("branches").at(i).at("tiles");
    if (jt.size() != plan.branches[i].tiles.size())
      throw ParseError("lksc plan: branch " + std::to_string(i) +
                       " tile count mismatch");
    for (std::size_t t = 0; t < jt.size(); ++t) {
      const auto& tile = plan.branches[i].tiles[t];
      if (jt[t].at("index").get<int>() != tile.index ||
          jt[t].at("dy").get<int>() != tile.dy ||
          jt[t].at("dx").get<int>() != tile.dx)
        throw ParseError("lksc plan: branch " + std::to_string(i) + " tile " +
                         std::to_string(t) +
                         " shift table disagrees with the planned schedule");
    }
  }

  plan.pointwise.weights =
      tensor(doc.at("pointwise").at("weights").get<std::string>()).data;
  plan.pointwise.bias =
      tensor(doc.at("pointwise").at("bias").get<std::string>()).data;
  plan.bn.scale = tensor(doc.at("bn").at("scale").get<std::string>()).data;
  plan.bn.shift = tensor(doc.at("bn").at("shift").get<std::string>()).data;
  plan.bn.mean = tensor(doc.at("bn").at("mean").get<std::string>()).data;
  plan.bn.var = tensor(doc.at("bn").at("var").get<std::string>()).data;
  plan.pointwise.validate();
  plan.bn.validate(spec.channels);
  return plan;
}

// --- block-stack configuration ---------------------------------------------------

namespace {

C2fConfig parse_block(const ojson& jb, std::size_t index) {
  auto fail = [&](const std::string& what) {
    throw ParseError("block stack: record " + std::to_string(index) + ": " +
                     what);
  };
  if (!jb.is_object()) fail("expected an object");
  static const char* known[] = {"variant", "c_in",   "c_out", "c_prime",
                                "n",       "kernel", "tile",  "faithful_eq6",
                                "groups"};
  for (const auto& [key, _] : jb.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail("unknown field '" + key + "'");
  }
  C2fConfig cfg;
  try {
    cfg.variant = c2f_variant_from_name(jb.at("variant").get<std::string>());
    cfg.c_in = jb.at("c_in").get<int>();
    cfg.c_out = jb.at("c_out").get<int>();
    cfg.c_prime = jb.value("c_prime", 0);
    cfg.n = jb.value("n", 1);
    cfg.kernel = jb.value("kernel", 0);
    cfg.tile = jb.value("tile", 5);
    cfg.faithful_eq6 = jb.value("faithful_eq6", true);
    cfg.groups = jb.value("groups", 1);
  } catch (const nlohmann::json::exception& e) {
    fail(e.what());
  } catch (const ParseError& e) {
    fail(e.what());
  }
  try {
    cfg.validate();
  } catch (const SpecError& e) {
    fail(e.what());
  }
  return cfg;
}

}  // namespace

std::vector<C2fConfig> parse_block_stack(const std::string& text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("block stack: " + std::string(e.what()));
  }
  if (!doc.is_array())
    throw ParseError("block stack: top-level value must be an array");
  if (doc.empty()) throw ParseError("block stack: empty block list");
  std::vector<C2fConfig> cfgs;
  for (std::size_t i = 0; i < doc.size(); ++i)
    cfgs.push_back(parse_block(doc[i], i));
  return cfgs;
}

std::vector<C2fConfig> load_block_stack(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_block_stack(buf.str());
}

// --- detection / ground-truth files ------------------------------------------------

namespace {

std::string id_field(const ojson& j, std::size_t index) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw ParseError("record " + std::to_string(index) +
                   ": image_id must be a string or integer");
}

Box box_field(const ojson& j, std::size_t index) {
  if (!j.is_array() || j.size() != 4)
    throw ParseError("record " + std::to_string(index) +
                     ": box must be [x1, y1, x2, y2]");
  Box b;
  b.x1 = j[0].get<double>();
  b.y1 = j[1].get<double>();
  b.x2 = j[2].get<double>();
  b.y2 = j[3].get<double>();
  try {
    b.validate();
  } catch (const SpecError& e) {
    throw ParseError("record " + std::to_string(index) + ": " + e.what());
  }
  return b;
}

ojson parse_array_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  ojson doc;
  try {
    doc = ojson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
  if (!doc.is_array())
    throw ParseError(std::string(what) + ": top-level value must be an array");
  return doc;
}

}  // namespace

std::vector<Detection> load_detections(const std::string& path) {
  const ojson doc = parse_array_file(path, "detections");
  std::vector<Detection> dets;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const ojson& j = doc[i];
    try {
      Detection d;
      d.image_id = id_field(j.at("image_id"), i);
      d.class_id = j.at("class_id").get<int>();
      d.box = box_field(j.at("box"), i);
      d.confidence = j.at("confidence").get<double>();
      if (d.confidence < 0.0 || d.confidence > 1.0)
        throw ParseError("record " + std::to_string(i) +
                         ": confidence must be in [0, 1]");
      dets.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("detections record " + std::to_string(i) + ": " +
                       e.what());
    }
  }
  return dets;
}

std::vector<GroundTruth> load_ground_truth(const std::string& path) {
  const ojson doc = parse_array_file(path, "ground truth");
  std::vector<GroundTruth> gts;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const ojson& j = doc[i];
    try {
      GroundTruth g;
      g.image_id = id_field(j.at("image_id"), i);
      g.class_id = j.at("class_id").get<int>();
      g.box = box_field(j.at("box"), i);
      gts.push_back(std::move(g));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("ground truth record " + std::to_string(i) + ": " +
                       e.what());
    }
  }
  return gts;
}

// --- report serialization -----------------------------------------------------------

namespace {

ojson cost_stack_json(const CostReport& r) {
  ojson blocks = ojson::array();
  for (const auto& b : r.blocks)
    blocks.push_back({{"label", b.label},
                      {"variant", b.variant},
                      {"params", b.params},
                      {"macs", b.macs}});
  return ojson{{"blocks", std::move(blocks)},
               {"total_params", r.total_params},
               {"total_macs", r.total_macs}};
}

void cost_stack_csv(std::ostream& out, const char* stack,
                    const CostReport& r) {
  for (const auto& b : r.blocks)
    out << stack << "," << b.label << "," << b.variant << "," << b.params
        << "," << b.macs << "\n";
  out << stack << ",total,," << r.total_params << "," << r.total_macs << "\n";
}

}  // namespace

std::string cost_report_json(Shape4 input, const CostReport& configured,
                             const CostReport& baseline,
                             const CostReport& dense) {
  ojson doc;
  doc["format"] = "aslks-cost-report";
  doc["version"] = kVersion;
  doc["input"] = {input.n, input.c, input.h, input.w};
  doc["stacks"] = {{"configured", cost_stack_json(configured)},
                   {"baseline_standard", cost_stack_json(baseline)},
                   {"dense_large_kernel", cost_stack_json(dense)}};
  doc["direction_check"] = {
      {"configured_params_leq_dense",
       configured.total_params <= dense.total_params},
      {"configured_minus_dense_params",
       configured.total_params - dense.total_params},
      {"configured_minus_baseline_params",
       configured.total_params - baseline.total_params}};
  return doc.dump(2) + "\n";
}

std::string cost_report_csv(const CostReport& configured,
                            const CostReport& baseline,
                            const CostReport& dense) {
  std::ostringstream out;
  out << "stack,block,variant,params,macs\n";
  cost_stack_csv(out, "configured", configured);
  cost_stack_csv(out, "baseline_standard", baseline);
  cost_stack_csv(out, "dense_large_kernel", dense);
  return out.str();
}

std::string ap_result_json(const ApResult& r) {
  auto fixed4 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "{\n  \"format\": \"aslks-metrics-report\",\n  \"version\": \""
      << kVersion << "\",\n  \"n_classes\": " << r.n_classes
      << ",\n  \"per_class_ap\": [";
  for (int i = 0; i < r.n_classes; ++i)
    out << (i > 0 ? ", " : "") << fixed4(r.per_class_ap[i]);
  out << "],\n  \"classes_without_gt\": [";
  bool first = true;
  for (int i = 0; i < r.n_classes; ++i)
    if (!r.class_has_gt[i]) {
      out << (first ? "" : ", ") << i;
      first = false;
    }
  out << "],\n  \"map50\": " << fixed4(r.map50) << "\n}\n";
  return out.str();
}

#define ASLKS_INSTANTIATE(T)                                                  \
  template void save_tensor<T>(std::ostream&, const Tensor4<T>&);             \
  template Tensor4<T> load_tensor_as<T>(std::istream&);                       \
  template void save_tensor_pack<T>(                                          \
      const std::string&,                                                     \
      const std::vector<std::pair<std::string, const Tensor4<T>*>>&);         \
  template std::map<std::string, Tensor4<T>> load_tensor_pack<T>(             \
      const std::string&);                                                    \
  template void save_asc_params<T>(const std::string&, const AscParams<T>&);  \
  template AscParams<T> load_asc_params<T>(const std::string&);               \
  template void save_lksc_plan<T>(const std::string&, const std::string&,     \
                                  const LkscPlan<T>&);                        \
  template LkscPlan<T> load_lksc_plan<T>(const std::string&);

ASLKS_INSTANTIATE(float)
ASLKS_INSTANTIATE(double)
#undef ASLKS_INSTANTIATE

}  // namespace aslks
