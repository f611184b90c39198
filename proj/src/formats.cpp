#include "fgradar/formats.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fgradar/errors.hpp"

namespace fgradar::formats {

namespace {

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw MissingInputError("cannot open input file: " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw Error("cannot open output file: " + path.string());
    return out;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(std::string_view tok, const fs::path& path, std::size_t line) {
    tok = trim(tok);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty())
        throw FormatError(path.string() + ":" + std::to_string(line) + ": bad number '" + std::string(tok) + "'");
    return v;
}

// Data lines of a comma-separated text file, each with exactly `fields` numbers.
std::vector<std::vector<double>> read_csv_rows(const fs::path& path, std::size_t fields) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            row.push_back(parse_double(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start),
                                       path, lineno));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (row.size() != fields)
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(fields) +
                              " fields, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::size_t as_index(double v, const fs::path& path) {
    if (!(v >= 0.0) || v != std::floor(v) || v > 4294967295.0)
        throw FormatError(path.string() + ": expected a non-negative integer, got " + format_double(v));
    return static_cast<std::size_t>(v);
}

// Little-endian byte writer/reader.
class ByteWriter {
  public:
    void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
    template <typename T>
    void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        std::array<char, sizeof(T)> raw = std::bit_cast<std::array<char, sizeof(T)>>(v);
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
        bytes(raw.data(), raw.size());
    }
    void u16(std::uint16_t v) { put(v); }
    void u32(std::uint32_t v) { put(v); }
    void f32(float v) { put(v); }
    void f64(double v) { put(v); }
    std::vector<char>& data() { return buf_; }

  private:
    std::vector<char> buf_;
};

class ByteReader {
  public:
    explicit ByteReader(std::span<const char> data) : data_(data) {}
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw FormatError("truncated binary file");
    }
    std::string magic(std::size_t n) {
        need(n);
        std::string s(data_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    template <typename T>
    T get() {
        need(sizeof(T));
        std::array<char, sizeof(T)> raw;
        std::memcpy(raw.data(), data_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
        pos_ += sizeof(T);
        return std::bit_cast<T>(raw);
    }
    std::uint16_t u16() { return get<std::uint16_t>(); }
    std::uint32_t u32() { return get<std::uint32_t>(); }
    float f32() { return get<float>(); }
    double f64() { return get<double>(); }
    std::size_t remaining() const { return data_.size() - pos_; }

  private:
    std::span<const char> data_;
    std::size_t pos_ = 0;
};

std::vector<char> slurp(const fs::path& path) {
    auto in = open_in(path, std::ios::in | std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const fs::path& path, const std::vector<char>& bytes) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + path.string());
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > 0xFFFFFFFFull) throw ConfigError(std::string(what) + " does not fit in 32 bits");
    return static_cast<std::uint32_t>(v);
}

constexpr char kCubeMagic[] = "FGCB";
constexpr char kFrameMagic[] = "FGFR";
constexpr std::uint16_t kCubeVersion = 1;

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "nan";
    return {buf, ptr};
}

Scene read_scene(const fs::path& path) {
    Scene scene;
    for (const auto& r : read_csv_rows(path, 5)) scene.scatterers.push_back({{r[0], r[1], r[2]}, {r[3], r[4]}});
    return scene;
}

void write_scene(const fs::path& path, const Scene& scene) {
    auto out = open_out(path);
    out << "# x,y,z,re,im\n";
    for (const auto& s : scene.scatterers) {
        out << format_double(s.position.x) << ',' << format_double(s.position.y) << ','
            << format_double(s.position.z) << ',' << format_double(s.reflectivity.real()) << ','
            << format_double(s.reflectivity.imag()) << '\n';
    }
}

std::vector<AperturePose> read_poses(const fs::path& path) {
    std::vector<AperturePose> poses;
    for (const auto& r : read_csv_rows(path, 5))
        poses.push_back({{r[0], r[1], r[2]}, r[3], static_cast<std::uint32_t>(as_index(r[4], path))});
    return poses;
}

void write_poses(const fs::path& path, std::span<const AperturePose> poses) {
    auto out = open_out(path);
    out << "# x,y,z,t,channel\n";
    for (const auto& p : poses) {
        out << format_double(p.position.x) << ',' << format_double(p.position.y) << ','
            << format_double(p.position.z) << ',' << format_double(p.timestamp) << ',' << p.channel << '\n';
    }
}

std::vector<char> encode_cube(const RawDataCube& cube) {
    cube.validate();
    ByteWriter w;
    w.bytes(kCubeMagic, 4);
    w.u16(kCubeVersion);
    w.u32(checked_u32(cube.n_x(), "n_x"));
    w.u32(checked_u32(cube.n_y(), "n_y"));
    w.u32(checked_u32(cube.n_channels(), "n_channels"));
    w.u32(checked_u32(cube.n_samples(), "n_samples"));
    const auto& c = cube.config;
    for (double v : {c.f0, c.bandwidth, c.duration, c.fs, static_cast<double>(c.n_samples), c.c}) w.f64(v);
    for (const auto& p : cube.grid.poses) {
        w.f64(p.position.x);
        w.f64(p.position.y);
        w.f64(p.position.z);
        w.f64(p.timestamp);
    }
    for (const auto& s : cube.samples) {
        w.f32(static_cast<float>(s.real()));
        w.f32(static_cast<float>(s.imag()));
    }
    return std::move(w.data());
}

RawDataCube decode_cube(std::span<const char> bytes) {
    ByteReader r(bytes);
    if (r.remaining() < 4 || r.magic(4) != std::string(kCubeMagic, 4)) throw FormatError("not an FGCB cube (bad magic)");
    const auto version = r.u16();
    if (version != kCubeVersion) throw FormatError("unsupported FGCB version " + std::to_string(version));
    RawDataCube cube;
    cube.grid.n_x = r.u32();
    cube.grid.n_y = r.u32();
    cube.grid.n_channels = r.u32();
    const std::size_t n_samples = r.u32();
    auto& c = cube.config;
    c.f0 = r.f64();
    c.bandwidth = r.f64();
    c.duration = r.f64();
    c.fs = r.f64();
    const double n_as_f64 = r.f64();
    c.c = r.f64();
    c.n_samples = n_samples;
    if (n_as_f64 != static_cast<double>(n_samples)) throw FormatError("FGCB header sample counts disagree");

    const std::size_t elements = cube.grid.element_count();
    const std::size_t pose_bytes = elements * 4 * sizeof(double);
    const std::size_t sample_bytes = elements * n_samples * 2 * sizeof(float);
    if (elements == 0 || r.remaining() != pose_bytes + sample_bytes)
        throw FormatError("FGCB payload size does not match header (truncated or padded file)");
    cube.grid.poses.resize(elements);
    for (std::size_t el = 0; el < elements; ++el) {
        auto& p = cube.grid.poses[el];
        p.position.x = r.f64();
        p.position.y = r.f64();
        p.position.z = r.f64();
        p.timestamp = r.f64();
        p.channel = static_cast<std::uint32_t>(el % cube.grid.n_channels);
    }
    cube.samples.resize(elements * n_samples);
    for (auto& s : cube.samples) {
        const float re = r.f32();
        const float im = r.f32();
        s = {re, im};
    }
    try {
        cube.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("invalid FGCB contents: ") + e.what());
    }
    return cube;
}

void write_cube(const fs::path& path, const RawDataCube& cube) { dump(path, encode_cube(cube)); }

RawDataCube read_cube(const fs::path& path) {
    const auto bytes = slurp(path);
    try {
        return decode_cube(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::vector<TimestampedPose> read_pose_stream(const fs::path& path) {
    std::vector<TimestampedPose> out;
    for (const auto& r : read_csv_rows(path, 4)) out.push_back({{r[1], r[2], r[3]}, r[0]});
    return out;
}

void write_pose_stream(const fs::path& path, std::span<const TimestampedPose> poses) {
    auto out = open_out(path);
    out << "# t,x,y,z\n";
    for (const auto& p : poses) {
        out << format_double(p.timestamp) << ',' << format_double(p.position.x) << ','
            << format_double(p.position.y) << ',' << format_double(p.position.z) << '\n';
    }
}

FrameStream read_frame_stream(const fs::path& path) {
    const auto bytes = slurp(path);
    ByteReader r(bytes);
    if (r.remaining() < 4 || r.magic(4) != std::string(kFrameMagic, 4))
        throw FormatError(path.string() + ": not an FGFR frame stream (bad magic)");
    FrameStream fsm;
    const std::size_t n_frames = r.u32();
    fsm.n_channels = r.u32();
    fsm.n_samples = r.u32();
    const std::size_t per_frame = fsm.n_channels * fsm.n_samples;
    if (r.remaining() != n_frames * (sizeof(double) + per_frame * 2 * sizeof(float)))
        throw FormatError(path.string() + ": FGFR payload size does not match header");
    fsm.frames.resize(n_frames);
    for (auto& f : fsm.frames) {
        f.timestamp = r.f64();
        f.samples.resize(per_frame);
        for (auto& s : f.samples) {
            const float re = r.f32();
            const float im = r.f32();
            s = {re, im};
        }
    }
    return fsm;
}

void write_frame_stream(const fs::path& path, const FrameStream& stream) {
    ByteWriter w;
    w.bytes(kFrameMagic, 4);
    w.u32(checked_u32(stream.frames.size(), "n_frames"));
    w.u32(checked_u32(stream.n_channels, "n_channels"));
    w.u32(checked_u32(stream.n_samples, "n_samples"));
    for (const auto& f : stream.frames) {
        if (f.samples.size() != stream.n_channels * stream.n_samples)
            throw ConfigError("frame size does not match n_channels * n_samples");
        w.f64(f.timestamp);
        for (const auto& s : f.samples) {
            w.f32(static_cast<float>(s.real()));
            w.f32(static_cast<float>(s.imag()));
        }
    }
    dump(path, w.data());
}

CalibrationModel read_model(const fs::path& path) {
    CalibrationModel model;
    for (const auto& r : read_csv_rows(path, 4)) {
        if (as_index(r[0], path) != model.f_hat.size())
            throw FormatError(path.string() + ": channels must be listed in order from 0");
        model.f_hat.push_back(r[1]);
        model.alpha.emplace_back(r[2], r[3]);
    }
    if (model.f_hat.empty()) throw FormatError(path.string() + ": empty calibration model");
    return model;
}

void write_model(const fs::path& path, const CalibrationModel& model) {
    auto out = open_out(path);
    out << "# channel,f_hat_hz,alpha_re,alpha_im\n";
    for (std::size_t l = 0; l < model.n_channels(); ++l) {
        out << l << ',' << format_double(model.f_hat[l]) << ',' << format_double(model.alpha[l].real()) << ','
            << format_double(model.alpha[l].imag()) << '\n';
    }
}

std::vector<ChannelError> read_channel_errors(const fs::path& path) {
    std::vector<ChannelError> errors;
    for (const auto& r : read_csv_rows(path, 4)) {
        if (as_index(r[0], path) != errors.size())
            throw FormatError(path.string() + ": channels must be listed in order from 0");
        errors.push_back({{r[1], r[2]}, r[3]});
    }
    return errors;
}

void write_channel_errors(const fs::path& path, std::span<const ChannelError> errors) {
    auto out = open_out(path);
    out << "# channel,alpha_re,alpha_im,tau_s\n";
    for (std::size_t l = 0; l < errors.size(); ++l) {
        out << l << ',' << format_double(errors[l].alpha.real()) << ',' << format_double(errors[l].alpha.imag())
            << ',' << format_double(errors[l].tau) << '\n';
    }
}

void write_pgm16(const fs::path& path, const Grid2D<double>& mag) {
    double lo = 0.0, hi = 0.0;
    if (mag.size() > 0) {
        const auto [a, b] = std::minmax_element(mag.data.begin(), mag.data.end());
        lo = *a;
        hi = *b;
    }
    const double span = hi - lo;
    std::ostringstream header;
    header << "P5\n" << mag.nx << ' ' << mag.ny << "\n65535\n";
    std::vector<char> bytes;
    const std::string h = header.str();
    bytes.insert(bytes.end(), h.begin(), h.end());
    for (std::size_t iy = 0; iy < mag.ny; ++iy) {
        for (std::size_t ix = 0; ix < mag.nx; ++ix) {
            const double u = span > 0.0 ? (mag(ix, iy) - lo) / span : 0.0;
            const auto v = static_cast<std::uint16_t>(std::lround(std::clamp(u, 0.0, 1.0) * 65535.0));
            // PGM samples wider than 8 bits are most significant byte first.
            bytes.push_back(static_cast<char>(v >> 8));
            bytes.push_back(static_cast<char>(v & 0xFF));
        }
    }
    dump(path, bytes);
}

void write_image(const fs::path& prefix, const ComplexImage& img) {
    auto with_ext = [&](const char* ext) { return fs::path(prefix.string() + ext); };
    write_pgm16(with_ext(".pgm"), magnitude_image(img));
    {
        auto out = open_out(with_ext(".csv"));
        for (std::size_t iy = 0; iy < img.ny(); ++iy) {
            for (std::size_t ix = 0; ix < img.nx(); ++ix) {
                const cdouble v = img.values(ix, iy);
                out << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
            }
        }
    }
    auto meta = open_out(with_ext(".meta"));
    meta << "nx=" << img.nx() << '\n'
         << "ny=" << img.ny() << '\n'
         << "origin_x=" << format_double(img.origin_x) << '\n'
         << "origin_y=" << format_double(img.origin_y) << '\n'
         << "pitch_x=" << format_double(img.pitch_x) << '\n'
         << "pitch_y=" << format_double(img.pitch_y) << '\n'
         << "plane_z=" << format_double(img.plane_z) << '\n';
}

ComplexImage read_image(const fs::path& prefix) {
    const fs::path meta_path(prefix.string() + ".meta");
    auto meta = open_in(meta_path);
    ComplexImage img;
    std::size_t nx = 0, ny = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(meta, line)) {
        ++lineno;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key(trim(std::string_view(line).substr(0, eq)));
        const double v = parse_double(std::string_view(line).substr(eq + 1), meta_path, lineno);
        if (key == "nx") nx = as_index(v, meta_path);
        else if (key == "ny") ny = as_index(v, meta_path);
        else if (key == "origin_x") img.origin_x = v;
        else if (key == "origin_y") img.origin_y = v;
        else if (key == "pitch_x") img.pitch_x = v;
        else if (key == "pitch_y") img.pitch_y = v;
        else if (key == "plane_z") img.plane_z = v;
    }
    const fs::path csv_path(prefix.string() + ".csv");
    const auto rows = read_csv_rows(csv_path, 2);
    if (nx == 0 || ny == 0 || rows.size() != nx * ny)
        throw FormatError(csv_path.string() + ": pixel count does not match sidecar dimensions");
    img.values = Grid2D<cdouble>(nx, ny);
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const auto& r = rows[iy * nx + ix];
            img.values(ix, iy) = {r[0], r[1]};
        }
    return img;
}

namespace {

struct TextGrid {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> values;
};

// "H W" header then H*W whitespace-separated numbers.
TextGrid read_grid_text(const fs::path& path) {
    auto in = open_in(path);
    std::string content;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        content += line;
        content += '\n';
    }
    std::istringstream ss(content);
    std::vector<double> values;
    std::string tok;
    std::size_t count = 0;
    std::size_t h = 0, w = 0;
    while (ss >> tok) {
        const double v = parse_double(tok, path, 0);
        if (count == 0) h = as_index(v, path);
        else if (count == 1) w = as_index(v, path);
        else values.push_back(v);
        ++count;
    }
    if (count < 2) throw FormatError(path.string() + ": missing 'H W' header");
    if (values.size() != h * w)
        throw FormatError(path.string() + ": expected " + std::to_string(h * w) + " values, found " +
                          std::to_string(values.size()));
    return {h, w, std::move(values)};
}

}  // namespace

DepthMap read_depth_map(const fs::path& path) {
    TextGrid g = read_grid_text(path);
    DepthMap map(g.height, g.width);
    map.values = std::move(g.values);
    for (std::size_t i = 0; i < map.values.size(); ++i) map.valid[i] = std::isfinite(map.values[i]);
    return map;
}

void write_depth_map(const fs::path& path, const DepthMap& map) {
    auto out = open_out(path);
    out << map.height << ' ' << map.width << '\n';
    for (std::size_t r = 0; r < map.height; ++r) {
        for (std::size_t c = 0; c < map.width; ++c) out << (c ? " " : "") << format_double(map.at(r, c));
        out << '\n';
    }
}

void apply_mask_file(const fs::path& path, DepthMap& map) {
    const TextGrid g = read_grid_text(path);
    const auto& values = g.values;
    if (g.height != map.height || g.width != map.width) throw ShapeError(path.string() + ": mask shape differs from depth map");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] != 0.0 && values[i] != 1.0) throw FormatError(path.string() + ": mask entries must be 0 or 1");
        map.valid[i] = map.valid[i] && values[i] == 1.0;
    }
}

std::vector<double> read_values(const fs::path& path) {
    auto in = open_in(path);
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) out.push_back(parse_double(tok, path, lineno));
    }
    return out;
}

}  // namespace fgradar::formats
