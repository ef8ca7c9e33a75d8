#include "dense/geometry/glb.hpp"

#include <cstring>
#include <map>
#include <set>

#include <json.hpp>

#include "dense/core/error.hpp"
#include "dense/geometry/image.hpp"

namespace dense::geometry {

namespace {

using nlohmann::json;

constexpr std::uint32_t kMagic = 0x46546C67;
constexpr std::uint32_t kJsonChunk = 0x4E4F534A;
constexpr std::uint32_t kBinChunk = 0x004E4942;

std::uint32_t le32(std::string_view d, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(d[at + static_cast<std::size_t>(i)]);
  return v;
}

[[noreturn]] void malformed(const std::string& what) { throw Error("MALFORMED_CHUNK", what); }

std::size_t component_size(int type) {
  switch (type) {
    case 5120:
    case 5121: return 1;
    case 5122:
    case 5123: return 2;
    case 5125:
    case 5126: return 4;
    default: malformed("unknown accessor componentType " + std::to_string(type));
  }
}

std::size_t component_count(const std::string& type) {
  static const std::map<std::string, std::size_t> counts = {{"SCALAR", 1}, {"VEC2", 2}, {"VEC3", 3}, {"VEC4", 4},
                                                            {"MAT2", 4},   {"MAT3", 9}, {"MAT4", 16}};
  const auto it = counts.find(type);
  if (it == counts.end()) malformed("unknown accessor type " + type);
  return it->second;
}

const json& member(const json& obj, const char* key) {
  static const json empty = json::array();
  const auto it = obj.find(key);
  return it == obj.end() ? empty : *it;
}

const json& at(const json& array, std::size_t i, const char* what) {
  if (!array.is_array() || i >= array.size()) malformed(std::string(what) + " index " + std::to_string(i) + " out of range");
  return array[i];
}

class Document {
 public:
  Document(json doc, std::string_view bin) : doc_(std::move(doc)), bin_(bin) {}

  const json& root() const { return doc_; }

  std::string_view buffer_view(std::size_t index) const {
    const json& view = at(member(doc_, "bufferViews"), index, "bufferView");
    const std::size_t buffer = view.value("buffer", 0u);
    const json& buf = at(member(doc_, "buffers"), buffer, "buffer");
    if (buf.contains("uri") || buffer != 0) malformed("only the embedded BIN buffer is supported");
    const std::size_t offset = view.value("byteOffset", 0u);
    const std::size_t length = view.at("byteLength").get<std::size_t>();
    if (offset > bin_.size() || length > bin_.size() - offset) malformed("bufferView exceeds BIN chunk");
    return bin_.substr(offset, length);
  }

  // Every element of an accessor widened to double, normalized if flagged.
  std::vector<double> read_accessor(std::size_t index, std::size_t expect_components, std::size_t* count_out) const {
    const json& acc = at(member(doc_, "accessors"), index, "accessor");
    if (acc.contains("sparse")) malformed("sparse accessors are not supported");
    const int type = acc.at("componentType").get<int>();
    const std::size_t comps = component_count(acc.at("type").get<std::string>());
    if (expect_components && comps != expect_components) malformed("unexpected accessor type");
    const std::size_t count = acc.at("count").get<std::size_t>();
    const bool normalized = acc.value("normalized", false);
    const std::size_t csize = component_size(type);
    const std::size_t elem = csize * comps;
    *count_out = count;
    std::vector<double> out(count * comps, 0.0);
    if (!acc.contains("bufferView")) return out;  // all zeros

    const std::string_view data = buffer_view(acc["bufferView"].get<std::size_t>());
    const json& view = doc_["bufferViews"][acc["bufferView"].get<std::size_t>()];
    const std::size_t stride = view.value("byteStride", elem);
    const std::size_t offset = acc.value("byteOffset", 0u);
    if (stride < elem) malformed("byteStride smaller than element");
    if (count && (offset > data.size() || (count - 1) * stride + elem > data.size() - offset)) {
      malformed("accessor exceeds its bufferView");
    }
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t c = 0; c < comps; ++c) {
        const char* p = data.data() + offset + i * stride + c * csize;
        double v = 0;
        switch (type) {
          case 5120: { std::int8_t x; std::memcpy(&x, p, 1); v = normalized ? std::max(x / 127.0, -1.0) : x; break; }
          case 5121: { std::uint8_t x; std::memcpy(&x, p, 1); v = normalized ? x / 255.0 : x; break; }
          case 5122: { std::int16_t x; std::memcpy(&x, p, 2); v = normalized ? std::max(x / 32767.0, -1.0) : x; break; }
          case 5123: { std::uint16_t x; std::memcpy(&x, p, 2); v = normalized ? x / 65535.0 : x; break; }
          case 5125: { std::uint32_t x; std::memcpy(&x, p, 4); v = x; break; }
          case 5126: { float x; std::memcpy(&x, p, 4); v = x; break; }
        }
        out[i * comps + c] = v;
      }
    }
    return out;
  }

  std::shared_ptr<const Image> image(std::size_t texture_index) {
    const json& tex = at(member(doc_, "textures"), texture_index, "texture");
    if (!tex.contains("source")) return nullptr;
    const std::size_t source = tex["source"].get<std::size_t>();
    if (auto it = images_.find(source); it != images_.end()) return it->second;
    const json& img = at(member(doc_, "images"), source, "image");
    if (!img.contains("bufferView")) malformed("images must be embedded in the BIN chunk");
    auto decoded = std::make_shared<const Image>(decode_image(buffer_view(img["bufferView"].get<std::size_t>())));
    images_[source] = decoded;
    return decoded;
  }

  Material material(const json& primitive) {
    Material m;
    if (!primitive.contains("material")) return m;
    const json& mat = at(member(doc_, "materials"), primitive["material"].get<std::size_t>(), "material");
    const json pbr = mat.value("pbrMetallicRoughness", json::object());
    if (pbr.contains("baseColorFactor")) {
      const auto f = pbr["baseColorFactor"].get<std::vector<double>>();
      if (f.size() != 4) malformed("baseColorFactor must have 4 components");
      std::copy(f.begin(), f.end(), m.base_color_factor.begin());
    }
    if (pbr.contains("baseColorTexture")) m.base_color_texture = image(pbr["baseColorTexture"].at("index").get<std::size_t>());
    return m;
  }

 private:
  json doc_;
  std::string_view bin_;
  std::map<std::size_t, std::shared_ptr<const Image>> images_;
};

Mat4 local_matrix(const json& node) {
  if (node.contains("matrix")) {
    const auto v = node["matrix"].get<std::vector<double>>();
    if (v.size() != 16) malformed("node matrix must have 16 elements");
    Mat4 m{};
    std::copy(v.begin(), v.end(), m.begin());
    return m;
  }
  std::array<double, 3> t{0, 0, 0}, s{1, 1, 1};
  std::array<double, 4> q{0, 0, 0, 1};
  if (node.contains("translation")) t = node["translation"].get<std::array<double, 3>>();
  if (node.contains("rotation")) q = node["rotation"].get<std::array<double, 4>>();
  if (node.contains("scale")) s = node["scale"].get<std::array<double, 3>>();
  return compose_trs(t, q, s);
}

void emit_mesh(Document& doc, std::size_t mesh_index, const std::string& name, const std::string& path,
               const Mat4& world, std::vector<TriangleMesh>& out) {
  const json& mesh = at(member(doc.root(), "meshes"), mesh_index, "mesh");
  for (const json& prim : member(mesh, "primitives")) {
    const int mode = prim.value("mode", 4);
    if (mode != 4) {
      throw Error("UNSUPPORTED_PRIMITIVE_MODE",
                  "primitive mode " + std::to_string(mode) + " on node '" + name + "'; only triangles are accepted");
    }
    const json attrs = prim.value("attributes", json::object());
    if (!attrs.contains("POSITION")) throw Error("MISSING_POSITION", "primitive on node '" + name + "' has no POSITION");

    TriangleMesh tm;
    tm.node_name = name;
    tm.node_path = path;
    tm.world_transform = world;
    std::size_t nverts = 0;
    const auto pos = doc.read_accessor(attrs["POSITION"].get<std::size_t>(), 3, &nverts);
    tm.vertices.resize(nverts);
    for (std::size_t i = 0; i < nverts; ++i) {
      tm.vertices[i] = {static_cast<float>(pos[3 * i]), static_cast<float>(pos[3 * i + 1]), static_cast<float>(pos[3 * i + 2])};
    }
    if (attrs.contains("TEXCOORD_0")) {
      std::size_t nuv = 0;
      const auto uv = doc.read_accessor(attrs["TEXCOORD_0"].get<std::size_t>(), 2, &nuv);
      if (nuv != nverts) malformed("TEXCOORD_0 count differs from POSITION count");
      tm.uvs.emplace(nuv);
      for (std::size_t i = 0; i < nuv; ++i) (*tm.uvs)[i] = {static_cast<float>(uv[2 * i]), static_cast<float>(uv[2 * i + 1])};
    }
    std::vector<double> idx;
    std::size_t nidx = 0;
    if (prim.contains("indices")) {
      idx = doc.read_accessor(prim["indices"].get<std::size_t>(), 1, &nidx);
    } else {
      nidx = nverts;
      idx.resize(nverts);
      for (std::size_t i = 0; i < nverts; ++i) idx[i] = static_cast<double>(i);
    }
    if (nidx % 3) malformed("triangle index count is not a multiple of 3");
    tm.triangles.resize(nidx / 3);
    for (std::size_t t = 0; t < nidx / 3; ++t) {
      for (std::size_t k = 0; k < 3; ++k) {
        const double v = idx[3 * t + k];
        if (v < 0 || v >= static_cast<double>(nverts)) malformed("vertex index out of range");
        tm.triangles[t][k] = static_cast<std::uint32_t>(v);
      }
    }
    tm.material = doc.material(prim);
    out.push_back(std::move(tm));
  }
}

void walk(Document& doc, std::size_t index, const Mat4& parent, const std::string& parent_path,
          std::set<std::size_t>& on_stack, std::vector<TriangleMesh>& out) {
  const json& node = at(member(doc.root(), "nodes"), index, "node");
  if (!on_stack.insert(index).second) malformed("node hierarchy contains a cycle");
  const std::string name = node.value("name", "node_" + std::to_string(index));
  const std::string path = parent_path.empty() ? name : parent_path + "/" + name;
  const Mat4 world = multiply(parent, local_matrix(node));
  if (!is_affine(world)) malformed("node '" + name + "' has a non-affine transform");
  if (node.contains("mesh")) emit_mesh(doc, node["mesh"].get<std::size_t>(), name, path, world, out);
  for (const json& child : member(node, "children")) walk(doc, child.get<std::size_t>(), world, path, on_stack, out);
  on_stack.erase(index);
}

}  // namespace

std::vector<TriangleMesh> parse_glb(std::string_view bytes) {
  if (bytes.size() < 12 || le32(bytes, 0) != kMagic) throw Error("BAD_MAGIC", "not a binary glTF container");
  if (le32(bytes, 4) != 2) malformed("container version " + std::to_string(le32(bytes, 4)) + ", expected 2");
  const std::size_t total = le32(bytes, 8);
  if (total > bytes.size() || total < 12) malformed("declared length exceeds input");
  bytes = bytes.substr(0, total);

  std::string_view json_text, bin;
  std::size_t pos = 12;
  bool first = true;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 8) malformed("truncated chunk header");
    const std::size_t len = le32(bytes, pos);
    const std::uint32_t type = le32(bytes, pos + 4);
    if (len > bytes.size() - pos - 8) malformed("chunk exceeds container");
    const std::string_view body = bytes.substr(pos + 8, len);
    if (first && type != kJsonChunk) malformed("first chunk must be JSON");
    if (type == kJsonChunk && first) json_text = body;
    if (type == kBinChunk && bin.empty()) bin = body;
    first = false;
    pos += 8 + len;
  }
  if (first) malformed("missing JSON chunk");

  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    malformed(std::string("JSON chunk: ") + e.what());
  }

  try {
    Document d(std::move(doc), bin);
    const json& root = d.root();
    std::vector<std::size_t> roots;
    if (root.contains("scenes") && !root["scenes"].empty()) {
      const json& scene = at(root["scenes"], root.value("scene", 0u), "scene");
      for (const json& n : member(scene, "nodes")) roots.push_back(n.get<std::size_t>());
    } else {
      const json nodes = member(root, "nodes");
      std::set<std::size_t> children;
      for (const json& n : nodes) {
        for (const json& c : member(n, "children")) children.insert(c.get<std::size_t>());
      }
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!children.count(i)) roots.push_back(i);
      }
    }
    std::vector<TriangleMesh> out;
    std::set<std::size_t> on_stack;
    for (std::size_t r : roots) walk(d, r, kIdentity, "", on_stack, out);
    return out;
  } catch (const json::exception& e) {
    malformed(std::string("glTF JSON: ") + e.what());
  }
}

}  // namespace dense::geometry
