#include "kunn/kten.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "KTEN I/O writes raw f64/u32 and requires a little-endian host");

namespace kunn {

namespace {

constexpr char kMagic[4] = {'K', 'T', 'E', 'N'};

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

std::string temp_path_for(const std::string& path) { return path + ".tmp"; }

void commit(std::ofstream& out, const std::string& tmp, const std::string& path) {
    out.flush();
    if (!out)
        throw std::runtime_error("kten: short write to " + tmp);
    out.close();
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("kten: cannot rename " + tmp + " to " + path);
    }
}

void write_header(std::ofstream& out, std::uint8_t dtype,
                  const std::vector<std::size_t>& shape) {
    if (shape.empty() || shape.size() > 255)
        throw std::invalid_argument("kten: unsupported rank " + std::to_string(shape.size()));
    write_bytes(out, kMagic, 4);
    const std::uint8_t version = 1;
    write_bytes(out, &version, 1);
    write_bytes(out, &dtype, 1);
    const std::uint8_t ndim = static_cast<std::uint8_t>(shape.size());
    write_bytes(out, &ndim, 1);
    for (std::size_t d : shape) {
        if (d > UINT32_MAX)
            throw std::invalid_argument("kten: dimension too large");
        const std::uint32_t d32 = static_cast<std::uint32_t>(d);
        write_bytes(out, &d32, 4);
    }
}

} // namespace

void write_text(const std::string& path, const std::string& content) {
    const std::string tmp = temp_path_for(path);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("kten: cannot open " + tmp + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    commit(out, tmp, path);
}

void write_kten(const std::string& path, const Tensor& t) {
    const std::string tmp = temp_path_for(path);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("kten: cannot open " + tmp + " for writing");
    write_header(out, 0, t.shape());
    write_bytes(out, t.data(), t.size() * sizeof(double));
    commit(out, tmp, path);
}

void write_kten(const std::string& path, const CTensor& t) {
    const std::string tmp = temp_path_for(path);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("kten: cannot open " + tmp + " for writing");
    write_header(out, 1, t.shape());
    write_bytes(out, t.data(), t.size() * 2 * sizeof(double));
    commit(out, tmp, path);
}

KtenData read_kten(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("kten: cannot open " + path);
    char magic[4];
    std::uint8_t version = 0, dtype = 0, ndim = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 1);
    in.read(reinterpret_cast<char*>(&dtype), 1);
    in.read(reinterpret_cast<char*>(&ndim), 1);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("kten: " + path + " is not a KTEN file");
    if (version != 1)
        throw std::runtime_error("kten: " + path + " has unsupported version " +
                                 std::to_string(version));
    if (dtype > 1)
        throw std::runtime_error("kten: " + path + " has unknown dtype " + std::to_string(dtype));
    if (ndim == 0)
        throw std::runtime_error("kten: " + path + " has zero rank");
    std::vector<std::size_t> shape(ndim);
    std::size_t count = 1;
    for (std::uint8_t i = 0; i < ndim; ++i) {
        std::uint32_t d = 0;
        in.read(reinterpret_cast<char*>(&d), 4);
        if (!in || d == 0)
            throw std::runtime_error("kten: " + path + " has a bad dimension");
        shape[i] = d;
        count *= d;
    }
    KtenData out;
    out.is_complex = dtype == 1;
    const std::size_t doubles = count * (out.is_complex ? 2 : 1);
    std::vector<double> payload(doubles);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(doubles * sizeof(double)));
    if (!in)
        throw std::runtime_error("kten: " + path + " is truncated");
    if (out.is_complex) {
        std::vector<cplx> z(count);
        for (std::size_t i = 0; i < count; ++i) z[i] = {payload[2 * i], payload[2 * i + 1]};
        out.cplx = CTensor(shape, std::move(z));
    } else {
        out.real = Tensor(shape, std::move(payload));
    }
    return out;
}

Tensor read_kten_real(const std::string& path) {
    KtenData d = read_kten(path);
    if (d.is_complex)
        throw std::runtime_error("kten: " + path + " holds complex data, expected real");
    return std::move(d.real);
}

CTensor read_kten_complex(const std::string& path) {
    KtenData d = read_kten(path);
    if (!d.is_complex)
        throw std::runtime_error("kten: " + path + " holds real data, expected complex");
    return std::move(d.cplx);
}

void write_keyvals(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& kv) {
    const std::string tmp = temp_path_for(path);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("keyvals: cannot open " + tmp + " for writing");
    for (const auto& [k, v] : kv) {
        if (k.empty() || k.find('=') != std::string::npos || k.find('\n') != std::string::npos)
            throw std::invalid_argument("keyvals: bad key '" + k + "'");
        if (v.find('\n') != std::string::npos)
            throw std::invalid_argument("keyvals: value for '" + k + "' contains a newline");
        out << k << '=' << v << '\n';
    }
    commit(out, tmp, path);
}

std::map<std::string, std::string> read_keyvals(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("keyvals: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::runtime_error("keyvals: " + path + ":" + std::to_string(lineno) +
                                     " is not key=value");
        const std::string key = line.substr(0, eq);
        if (kv.count(key))
            throw std::runtime_error("keyvals: duplicate key '" + key + "' in " + path);
        kv[key] = line.substr(eq + 1);
    }
    return kv;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace kunn
