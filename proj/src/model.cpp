#include "ilnet/model.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <type_traits>

#include "ilnet/error.hpp"

namespace ilnet {

static_assert(std::endian::native == std::endian::little, "weight I/O assumes little-endian");

NetworkModel make_model(const ConvBackboneSpec& spec, std::span<const int> hidden, Rng& rng) {
  NetworkModel m;
  m.spec = spec;
  m.conv = init_backbone_weights(spec, rng);
  m.object_head = make_head(m.window_features(), hidden, kObjectClasses, rng);
  m.loc_head = make_head(m.window_features(), hidden, kLocClassCount, rng);
  return m;
}

std::vector<int> desk_hidden() { return {128, 128}; }
std::vector<int> vggm_hidden() { return {512, 512}; }

namespace {

constexpr char kMagic[4] = {'I', 'L', 'N', 'W'};
constexpr std::uint32_t kVersion = 1;

template <typename Vec>
struct TensorRef {
  std::string name;
  std::vector<std::uint32_t> dims;
  Vec* data;
};

// Model is NetworkModel or const NetworkModel; refs point into it.
template <typename Model>
auto list_tensors(Model& m) {
  using Vec = std::conditional_t<std::is_const_v<Model>, const std::vector<float>,
                                 std::vector<float>>;
  std::vector<TensorRef<Vec>> out;
  const auto convs = m.spec.conv_layers();
  for (std::size_t i = 0; i < convs.size() && i < m.conv.conv.size(); ++i) {
    const auto& c = convs[i];
    const std::string base = "conv" + std::to_string(i + 1);
    out.push_back({base + ".weight",
                   {std::uint32_t(c.out_channels), std::uint32_t(c.in_channels),
                    std::uint32_t(c.kernel), std::uint32_t(c.kernel)},
                   &m.conv.conv[i].weights});
    out.push_back({base + ".bias", {std::uint32_t(c.out_channels)}, &m.conv.conv[i].bias});
  }
  auto heads = [&](const char* prefix, auto& h) {
    for (std::size_t i = 0; i < h.layers.size(); ++i) {
      auto& l = h.layers[i];
      const std::string base = std::string(prefix) + ".fc" + std::to_string(i + 1);
      out.push_back({base + ".weight", {std::uint32_t(l.out), std::uint32_t(l.in)}, &l.weights});
      out.push_back({base + ".bias", {std::uint32_t(l.out)}, &l.bias});
    }
  };
  heads("object", m.object_head);
  heads("loc", m.loc_head);
  return out;
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}
  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n)
      throw FormatError(std::string("truncated stream reading ") + what, pos_);
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct ParsedTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
  std::size_t offset;
};

}  // namespace

std::vector<std::uint8_t> save_weights(const NetworkModel& model) {
  const auto tensors = list_tensors(model);
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put<std::uint8_t>(out, static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) put<std::uint32_t>(out, d);
    const auto* p = reinterpret_cast<const std::uint8_t*>(t.data->data());
    out.insert(out.end(), p, p + t.data->size() * sizeof(float));
  }
  const auto crc = static_cast<std::uint32_t>(crc32(0L, out.data(), static_cast<uInt>(out.size())));
  put<std::uint32_t>(out, crc);
  return out;
}

NetworkModel load_weights(std::span<const std::uint8_t> bytes, const NetworkModel& like) {
  if (bytes.size() < 4 + 4 + 4 + 4) throw FormatError("stream too short", bytes.size());
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + body, 4);
  const auto crc = static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(body)));

  Reader r(bytes.first(body));
  auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("bad magic", 0);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVersion)
    throw FormatError("unsupported version " + std::to_string(version), 4);
  if (crc != stored_crc) throw FormatError("CRC32 mismatch", body);
  const auto count = r.get<std::uint32_t>("tensor count");

  std::map<std::string, ParsedTensor> parsed;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::size_t at = r.pos();
    const auto len = r.get<std::uint16_t>("name length");
    auto name_bytes = r.take(len, "tensor name");
    std::string name(name_bytes.begin(), name_bytes.end());
    const auto rank = r.get<std::uint8_t>("rank");
    ParsedTensor pt;
    pt.offset = at;
    std::size_t n = 1;
    for (int d = 0; d < rank; ++d) {
      pt.dims.push_back(r.get<std::uint32_t>("dimension"));
      n *= pt.dims.back();
    }
    auto raw = r.take(n * sizeof(float), "tensor data");
    pt.data.resize(n);
    std::memcpy(pt.data.data(), raw.data(), raw.size());
    if (!parsed.emplace(name, std::move(pt)).second)
      throw FormatError("duplicate tensor '" + name + "'", at);
  }
  if (r.pos() != body) throw FormatError("trailing bytes after last tensor", r.pos());

  NetworkModel out = like;
  // Expected tensors in the output model, addressed through `out`.
  auto expected = list_tensors(out);
  for (const auto& [name, pt] : parsed) {
    const bool known = std::any_of(expected.begin(), expected.end(),
                                   [&](const auto& e) { return e.name == name; });
    if (!known) throw FormatError("unexpected tensor '" + name + "'", pt.offset);
  }
  auto group_complete = [&](const std::string& prefix) {
    bool any = false, all = true;
    for (const auto& e : expected) {
      if (e.name.rfind(prefix, 0) != 0) continue;
      const bool has = parsed.count(e.name) != 0;
      any |= has;
      all &= has;
    }
    if (any && !all) throw FormatError("incomplete tensor group '" + prefix + "'", body);
    return all;
  };
  const bool load_conv = group_complete("conv");
  if (!load_conv) throw FormatError("missing conv tensors", body);
  const bool load_obj = group_complete("object.");
  const bool load_loc = group_complete("loc.");
  for (const auto& e : expected) {
    const bool wanted = e.name.rfind("conv", 0) == 0 ||
                        (load_obj && e.name.rfind("object.", 0) == 0) ||
                        (load_loc && e.name.rfind("loc.", 0) == 0);
    if (!wanted) continue;
    const auto& pt = parsed.at(e.name);
    if (pt.dims != e.dims) {
      std::string want, got;
      for (auto d : e.dims) want += (want.empty() ? "" : "x") + std::to_string(d);
      for (auto d : pt.dims) got += (got.empty() ? "" : "x") + std::to_string(d);
      throw FormatError("shape mismatch for layer '" + e.name + "': expected " + want + ", got " +
                            got,
                        pt.offset);
    }
    *e.data = pt.data;
  }
  return out;
}

void write_weight_file(const std::string& path, const NetworkModel& model) {
  const auto bytes = save_weights(model);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for '" + path + "'");
}

NetworkModel read_weight_file(const std::string& path, const NetworkModel& like) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return load_weights(bytes, like);
}

}  // namespace ilnet
