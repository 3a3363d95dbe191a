#pragma once

#include "splatreg/geometry.hpp"
#include "splatreg/types.hpp"

#include <json.hpp>
#include <png.h>

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace splatreg::io {

using Json = nlohmann::json;

// Degree-0 real spherical harmonic, 1 / (2 sqrt(pi)).
inline constexpr double kShC0 = 0.28209479177387814;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path &path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// JSON helpers

inline Json to_json(const Vec3 &v) { return Json::array({v.x(), v.y(), v.z()}); }

namespace detail {

inline Json parse_json(const std::string &text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error &e) {
        throw ParseError(e.what(), e.byte);
    }
}

inline double number(const Json &j, const char *what) {
    if (!j.is_number()) throw InvalidInput(std::string("expected a number for ") + what);
    return j.get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> vec(const Json &j, const char *what) {
    if (!j.is_array() || j.size() != N) {
        throw InvalidInput(std::string("expected ") + std::to_string(N) + " numbers for " + what);
    }
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) v[i] = number(j[static_cast<std::size_t>(i)], what);
    return v;
}

} // namespace detail

inline Json scene_to_json(const Scene &scene) {
    Json gs = Json::array();
    for (const auto &g : scene.gaussians) {
        gs.push_back({{"mu", to_json(g.mu)},
                      {"opacity", g.opacity},
                      {"scale", to_json(g.scale)},
                      {"rotation", Json::array({g.rotation[0], g.rotation[1], g.rotation[2], g.rotation[3]})},
                      {"color", to_json(g.color)},
                      {"opacity3d", g.opacity3d},
                      {"normal", g.normal ? to_json(*g.normal) : Json(nullptr)}});
    }
    Json out = {{"gaussians", gs}};
    if (scene.has_provenance()) {
        Json prov = Json::array();
        for (const auto &p : scene.provenance) prov.push_back({{"view", p.view}, {"pixel", {p.row, p.col}}});
        out["provenance"] = prov;
    } else {
        out["provenance"] = nullptr;
    }
    for (const auto &[key, raw] : scene.extras) out[key] = Json::parse(raw);
    return out;
}

/// Parses the scene JSON layout. Unknown keys append to `warnings` when given;
/// unknown top-level keys are kept in Scene::extras.
inline Scene scene_from_json(const Json &j, std::vector<std::string> *warnings = nullptr) {
    auto warn = [&](const std::string &msg) {
        if (warnings) warnings->push_back(msg);
    };
    if (!j.is_object() || !j.contains("gaussians") || !j["gaussians"].is_array()) {
        throw InvalidInput("scene JSON must be an object with a \"gaussians\" array");
    }
    static const std::set<std::string> known = {"mu", "opacity", "scale", "rotation", "color", "opacity3d", "normal"};
    Scene scene;
    for (const auto &jg : j["gaussians"]) {
        if (!jg.is_object()) throw InvalidInput("gaussian entry must be an object");
        Gaussian g;
        g.mu = detail::vec<3>(jg.at("mu"), "mu");
        g.opacity = detail::number(jg.at("opacity"), "opacity");
        g.scale = detail::vec<3>(jg.at("scale"), "scale");
        g.rotation = detail::vec<4>(jg.at("rotation"), "rotation");
        g.color = detail::vec<3>(jg.at("color"), "color");
        g.opacity3d = jg.contains("opacity3d") ? detail::number(jg["opacity3d"], "opacity3d") : g.opacity;
        if (jg.contains("normal") && !jg["normal"].is_null()) g.normal = detail::vec<3>(jg["normal"], "normal");
        for (const auto &item : jg.items()) {
            if (!known.count(item.key())) {
                warn("gaussian " + std::to_string(scene.gaussians.size()) + ": unknown field \"" + item.key() + "\" dropped");
            }
        }
        validate(g);
        scene.gaussians.push_back(std::move(g));
    }
    if (j.contains("provenance") && !j["provenance"].is_null()) {
        const auto &jp = j["provenance"];
        if (!jp.is_array() || jp.size() != scene.gaussians.size()) {
            throw InvalidInput("provenance must have one entry per gaussian");
        }
        for (const auto &e : jp) {
            const auto &px = e.at("pixel");
            if (!px.is_array() || px.size() != 2) throw InvalidInput("provenance pixel must be [row, col]");
            scene.provenance.push_back({e.at("view").get<int>(), px[0].get<int>(), px[1].get<int>()});
        }
    }
    for (const auto &item : j.items()) {
        if (item.key() != "gaussians" && item.key() != "provenance") {
            warn("unknown top-level field \"" + item.key() + "\" preserved");
            scene.extras.emplace_back(item.key(), item.value().dump());
        }
    }
    return scene;
}

inline Json camera_to_json(const Camera &cam) {
    Json r = Json::array();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) r.push_back(cam.rotation_wc(i, k));
    return {{"fx", cam.fx},         {"fy", cam.fy}, {"cx", cam.cx},         {"cy", cam.cy},
            {"R", r},               {"t", to_json(cam.translation_wc)},    {"width", cam.width},
            {"height", cam.height}};
}

inline Camera camera_from_json(const Json &j) {
    Camera cam;
    cam.fx = detail::number(j.at("fx"), "fx");
    cam.fy = detail::number(j.at("fy"), "fy");
    cam.cx = detail::number(j.at("cx"), "cx");
    cam.cy = detail::number(j.at("cy"), "cy");
    const auto &r = j.at("R");
    if (!r.is_array() || r.size() != 9) throw InvalidInput("R must hold 9 numbers (row-major)");
    for (int i = 0; i < 9; ++i) cam.rotation_wc(i / 3, i % 3) = detail::number(r[static_cast<std::size_t>(i)], "R");
    cam.translation_wc = detail::vec<3>(j.at("t"), "t");
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    validate(cam);
    return cam;
}

inline Camera load_camera(const std::filesystem::path &path) {
    try {
        return camera_from_json(detail::parse_json(read_file(path)));
    } catch (const Json::exception &e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

inline void save_camera(const Camera &cam, const std::filesystem::path &path) {
    write_file(path, camera_to_json(cam).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// PLY (3DGS binary little-endian layout)

namespace detail {

struct PlyProperty {
    std::string name;
    std::string type;
    std::size_t offset = 0;
    std::size_t size = 0;
};

inline std::size_t ply_type_size(const std::string &type) {
    static const std::map<std::string, std::size_t> sizes = {
        {"char", 1},  {"uchar", 1},  {"int8", 1},    {"uint8", 1},  {"short", 2},  {"ushort", 2},
        {"int16", 2}, {"uint16", 2}, {"int", 4},     {"uint", 4},   {"int32", 4},  {"uint32", 4},
        {"float", 4}, {"float32", 4}, {"double", 8}, {"float64", 8}};
    auto it = sizes.find(type);
    return it == sizes.end() ? 0 : it->second;
}

template <typename T>
T load_le(const char *p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
    return v;
}

inline double read_ply_value(const char *p, const std::string &type) {
    if (type == "float" || type == "float32") return load_le<float>(p);
    if (type == "double" || type == "float64") return load_le<double>(p);
    if (type == "uchar" || type == "uint8") return load_le<std::uint8_t>(p);
    if (type == "char" || type == "int8") return load_le<std::int8_t>(p);
    if (type == "short" || type == "int16") return load_le<std::int16_t>(p);
    if (type == "ushort" || type == "uint16") return load_le<std::uint16_t>(p);
    if (type == "int" || type == "int32") return load_le<std::int32_t>(p);
    return load_le<std::uint32_t>(p);
}

template <typename T>
void append_le(std::string &out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

} // namespace detail

/// Parses a 3DGS-convention binary PLY held in memory. Spherical-harmonic
/// bands above degree 0 are dropped; DC terms become RGB.
inline Scene scene_from_ply(const std::string &bytes, std::vector<std::string> *warnings = nullptr) {
    const std::string end_marker = "end_header\n";
    const auto header_end = bytes.find(end_marker);
    if (bytes.rfind("ply\n", 0) != 0) throw ParseError("missing ply magic", 0);
    if (header_end == std::string::npos) throw ParseError("missing end_header", bytes.size());
    const std::size_t body = header_end + end_marker.size();

    std::vector<detail::PlyProperty> props;
    std::size_t vertex_count = 0;
    bool in_vertex = false, seen_vertex = false, seen_format = false;
    std::size_t line_start = 4;
    while (line_start < header_end) {
        const std::size_t line_end = bytes.find('\n', line_start);
        std::istringstream line(bytes.substr(line_start, line_end - line_start));
        std::string word;
        line >> word;
        if (word == "format") {
            std::string fmt;
            line >> fmt;
            if (fmt != "binary_little_endian") throw ParseError("unsupported PLY format '" + fmt + "'", line_start);
            seen_format = true;
        } else if (word == "element") {
            std::string name;
            std::size_t count = 0;
            line >> name >> count;
            if (name != "vertex" && count > 0) {
                throw ParseError("unsupported non-empty element '" + name + "'", line_start);
            }
            in_vertex = name == "vertex";
            if (in_vertex) {
                if (!line) throw ParseError("bad vertex element line", line_start);
                vertex_count = count;
                seen_vertex = true;
            }
        } else if (word == "property") {
            std::string type, name;
            line >> type;
            if (type == "list") throw ParseError("list properties are not supported", line_start);
            line >> name;
            const std::size_t size = detail::ply_type_size(type);
            if (size == 0 || name.empty()) throw ParseError("bad property line", line_start);
            if (in_vertex) {
                std::size_t offset = props.empty() ? 0 : props.back().offset + props.back().size;
                props.push_back({name, type, offset, size});
            }
        } else if (word != "comment" && word != "obj_info" && !word.empty()) {
            throw ParseError("unexpected header keyword '" + word + "'", line_start);
        }
        line_start = line_end + 1;
    }
    if (!seen_format) throw ParseError("missing format line", 4);
    if (!seen_vertex) throw ParseError("missing vertex element", 4);

    std::map<std::string, const detail::PlyProperty *> by_name;
    for (const auto &p : props) by_name[p.name] = &p;
    auto require = [&](const std::string &name) {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw ParseError("missing required property '" + name + "'", header_end);
        return it->second;
    };
    const char *required[] = {"x",       "y",       "z",       "f_dc_0",  "f_dc_1", "f_dc_2", "opacity",
                              "scale_0", "scale_1", "scale_2", "rot_0",   "rot_1",  "rot_2",  "rot_3"};
    for (const char *name : required) require(name);

    static const std::set<std::string> known = {"x",       "y",       "z",       "nx",      "ny",       "nz",
                                                "f_dc_0",  "f_dc_1",  "f_dc_2",  "opacity", "scale_0",  "scale_1",
                                                "scale_2", "rot_0",   "rot_1",   "rot_2",   "rot_3",    "opacity3d",
                                                "src_view", "src_row", "src_col"};
    for (const auto &p : props) {
        if (!known.count(p.name) && p.name.rfind("f_rest_", 0) != 0 && warnings) {
            warnings->push_back("unknown PLY property '" + p.name + "' ignored");
        }
    }

    const std::size_t stride = props.back().offset + props.back().size;
    if (bytes.size() < body + stride * vertex_count) {
        throw ParseError("truncated vertex data: expected " + std::to_string(stride * vertex_count) + " bytes",
                         bytes.size());
    }
    const bool has_normal = by_name.count("nx") && by_name.count("ny") && by_name.count("nz");
    const bool has_o3d = by_name.count("opacity3d") > 0;
    const bool has_prov = by_name.count("src_view") && by_name.count("src_row") && by_name.count("src_col");

    Scene scene;
    scene.gaussians.reserve(vertex_count);
    for (std::size_t i = 0; i < vertex_count; ++i) {
        const char *rec = bytes.data() + body + i * stride;
        auto get = [&](const std::string &name) {
            const auto *p = by_name.at(name);
            return detail::read_ply_value(rec + p->offset, p->type);
        };
        Gaussian g;
        g.mu = {get("x"), get("y"), get("z")};
        g.color = Vec3(get("f_dc_0"), get("f_dc_1"), get("f_dc_2")) * kShC0 + Vec3::Constant(0.5);
        g.opacity = sigmoid(get("opacity"));
        g.scale = {std::exp(get("scale_0")), std::exp(get("scale_1")), std::exp(get("scale_2"))};
        Eigen::Vector4d q(get("rot_0"), get("rot_1"), get("rot_2"), get("rot_3"));
        if (!(q.norm() > 0.0)) throw ParseError("zero quaternion in vertex " + std::to_string(i), body + i * stride);
        g.rotation = q.normalized();
        g.opacity3d = has_o3d ? sigmoid(get("opacity3d")) : g.opacity;
        if (has_normal) {
            Vec3 n(get("nx"), get("ny"), get("nz"));
            if (n.norm() > 0.0) g.normal = n.normalized();
        }
        if (!(g.scale.array() > 0.0).all()) {
            throw ParseError("non-positive scale in vertex " + std::to_string(i), body + i * stride);
        }
        scene.gaussians.push_back(std::move(g));
        if (has_prov) {
            scene.provenance.push_back({static_cast<int>(get("src_view")), static_cast<int>(get("src_row")),
                                        static_cast<int>(get("src_col"))});
        }
    }
    if (bytes.size() > body + stride * vertex_count && warnings) {
        warnings->push_back("trailing bytes after vertex data ignored");
    }
    return scene;
}

/// 3DGS layout plus `opacity3d` (logit) and, with provenance, int32 src_view/src_row/src_col.
inline std::string scene_to_ply(const Scene &scene) {
    const bool prov = scene.has_provenance();
    std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(scene.size()) + "\n";
    const char *float_props[] = {"x",      "y",       "z",       "nx",      "ny",      "nz",    "f_dc_0",
                                 "f_dc_1", "f_dc_2",  "opacity", "scale_0", "scale_1", "scale_2", "rot_0",
                                 "rot_1",  "rot_2",   "rot_3",   "opacity3d"};
    for (const char *p : float_props) out += std::string("property float ") + p + "\n";
    if (prov) out += "property int src_view\nproperty int src_row\nproperty int src_col\n";
    out += "end_header\n";
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const auto &g = scene.gaussians[i];
        const Vec3 n = g.normal.value_or(Vec3::Zero());
        const Vec3 dc = (g.color - Vec3::Constant(0.5)) / kShC0;
        const double values[] = {g.mu.x(),          g.mu.y(),          g.mu.z(),          n.x(),
                                 n.y(),             n.z(),             dc.x(),            dc.y(),
                                 dc.z(),            logit(g.opacity),  std::log(g.scale.x()), std::log(g.scale.y()),
                                 std::log(g.scale.z()), g.rotation[0], g.rotation[1],     g.rotation[2],
                                 g.rotation[3],     logit(g.opacity3d)};
        for (double v : values) detail::append_le<float>(out, static_cast<float>(v));
        if (prov) {
            detail::append_le<std::int32_t>(out, scene.provenance[i].view);
            detail::append_le<std::int32_t>(out, scene.provenance[i].row);
            detail::append_le<std::int32_t>(out, scene.provenance[i].col);
        }
    }
    return out;
}

/// Loads .json or .ply by extension.
inline Scene load_scene(const std::filesystem::path &path, std::vector<std::string> *warnings = nullptr) {
    if (!std::filesystem::exists(path)) throw std::runtime_error("scene file not found: " + path.string());
    const std::string bytes = read_file(path);
    if (path.extension() == ".ply") return scene_from_ply(bytes, warnings);
    try {
        return scene_from_json(detail::parse_json(bytes), warnings);
    } catch (const Json::exception &e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

inline void save_scene(const Scene &scene, const std::filesystem::path &path) {
    if (path.extension() == ".ply") {
        write_file(path, scene_to_ply(scene));
    } else {
        write_file(path, scene_to_json(scene).dump() + "\n");
    }
}

// ---------------------------------------------------------------------------
// PFM (32-bit float, little-endian, scale -1.0; rows stored bottom to top)

namespace detail {

inline std::string pfm_header(bool color, int width, int height) {
    return std::string(color ? "PF" : "Pf") + "\n" + std::to_string(width) + " " + std::to_string(height) + "\n-1.0\n";
}

struct PfmData {
    int channels = 0;
    int width = 0;
    int height = 0;
    std::vector<float> values; // top-to-bottom, interleaved
};

inline PfmData parse_pfm(const std::string &bytes) {
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (start == pos) throw ParseError("unexpected end of PFM header", pos);
        return bytes.substr(start, pos - start);
    };
    PfmData out;
    const std::string magic = token();
    if (magic == "PF") {
        out.channels = 3;
    } else if (magic == "Pf") {
        out.channels = 1;
    } else {
        throw ParseError("bad PFM magic", 0);
    }
    double scale = 0.0;
    try {
        out.width = std::stoi(token());
        out.height = std::stoi(token());
        scale = std::stod(token());
    } catch (const std::logic_error &) {
        throw ParseError("bad PFM header value", pos);
    }
    if (out.width <= 0 || out.height <= 0 || scale == 0.0) throw ParseError("bad PFM dimensions or scale", pos);
    ++pos; // single whitespace byte after scale
    const std::size_t n = static_cast<std::size_t>(out.width) * out.height * out.channels;
    if (bytes.size() < pos + n * 4) throw ParseError("truncated PFM data", bytes.size());
    out.values.resize(n);
    const std::size_t row_len = static_cast<std::size_t>(out.width) * out.channels;
    for (int r = 0; r < out.height; ++r) {
        const char *src = bytes.data() + pos + static_cast<std::size_t>(out.height - 1 - r) * row_len * 4;
        for (std::size_t k = 0; k < row_len; ++k) {
            std::uint32_t bits = load_le<std::uint32_t>(src + 4 * k);
            if (scale > 0.0) bits = __builtin_bswap32(bits);
            out.values[static_cast<std::size_t>(r) * row_len + k] = std::bit_cast<float>(bits);
        }
    }
    return out;
}

} // namespace detail

inline void write_pfm(const std::filesystem::path &path, const ImageBuffer &img) {
    std::string out = detail::pfm_header(true, img.width(), img.height());
    for (int r = img.height() - 1; r >= 0; --r)
        for (int c = 0; c < img.width(); ++c)
            for (int k = 0; k < 3; ++k) detail::append_le<float>(out, static_cast<float>(img(r, c)[k]));
    write_file(path, out);
}

inline void write_pfm(const std::filesystem::path &path, const Raster<double> &gray) {
    std::string out = detail::pfm_header(false, gray.width(), gray.height());
    for (int r = gray.height() - 1; r >= 0; --r)
        for (int c = 0; c < gray.width(); ++c) detail::append_le<float>(out, static_cast<float>(gray(r, c)));
    write_file(path, out);
}

inline ImageBuffer read_pfm_image(const std::filesystem::path &path) {
    const auto pfm = detail::parse_pfm(read_file(path));
    ImageBuffer img(pfm.height, pfm.width);
    for (int r = 0; r < pfm.height; ++r)
        for (int c = 0; c < pfm.width; ++c)
            for (int k = 0; k < 3; ++k) {
                const int ch = pfm.channels == 3 ? k : 0;
                img(r, c)[k] = pfm.values[(static_cast<std::size_t>(r) * pfm.width + c) * pfm.channels + ch];
            }
    return img;
}

inline Raster<double> read_pfm_gray(const std::filesystem::path &path) {
    const auto pfm = detail::parse_pfm(read_file(path));
    if (pfm.channels != 1) throw InvalidInput(path.string() + ": expected a single-channel PFM");
    Raster<double> out(pfm.height, pfm.width);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = pfm.values[i];
    return out;
}

// ---------------------------------------------------------------------------
// PNG

namespace detail {

inline void write_png_raw(const std::filesystem::path &path, int width, int height, int channels, int bit_depth,
                          const std::vector<std::uint8_t> &rows) {
    std::unique_ptr<FILE, int (*)(FILE *)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
    if (!fp) throw std::runtime_error("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng write failed: " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t row_bytes = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
    for (int r = 0; r < height; ++r) {
        png_write_row(png, const_cast<png_bytep>(rows.data() + static_cast<std::size_t>(r) * row_bytes));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

inline std::uint8_t to_u8(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

} // namespace detail

inline double linear_to_srgb(double v) {
    v = std::clamp(v, 0.0, 1.0);
    return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

/// 8-bit sRGB PNG of a linear image.
inline void write_png(const std::filesystem::path &path, const ImageBuffer &img) {
    std::vector<std::uint8_t> rows;
    rows.reserve(static_cast<std::size_t>(img.width()) * img.height() * 3);
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c)
            for (int k = 0; k < 3; ++k) rows.push_back(detail::to_u8(linear_to_srgb(img(r, c)[k])));
    detail::write_png_raw(path, img.width(), img.height(), 3, 8, rows);
}

/// 8-bit PNG of a unit-vector field using the (n + 1) / 2 color code; invalid entries are black.
inline void write_normal_png(const std::filesystem::path &path, const Raster<Vec3> &normals,
                             const Raster<std::uint8_t> &valid) {
    std::vector<std::uint8_t> rows;
    for (int r = 0; r < normals.height(); ++r)
        for (int c = 0; c < normals.width(); ++c)
            for (int k = 0; k < 3; ++k)
                rows.push_back(valid(r, c) ? detail::to_u8((normals(r, c)[k] + 1.0) * 0.5) : 0);
    detail::write_png_raw(path, normals.width(), normals.height(), 3, 8, rows);
}

/// 16-bit grayscale PNG (big-endian samples, as PNG requires).
inline void write_png16(const std::filesystem::path &path, const Raster<int> &values) {
    std::vector<std::uint8_t> rows;
    rows.reserve(values.size() * 2);
    for (int v : values.data()) {
        const auto u = static_cast<std::uint16_t>(std::clamp(v, 0, 65535));
        rows.push_back(static_cast<std::uint8_t>(u >> 8));
        rows.push_back(static_cast<std::uint8_t>(u & 0xff));
    }
    detail::write_png_raw(path, values.width(), values.height(), 1, 16, rows);
}

} // namespace splatreg::io
