#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kunn/ctensor.hpp"
#include "kunn/tensor.hpp"

namespace kunn {

/// KTEN tensor container, fixed little-endian layout:
///   magic "KTEN" | version u8 = 1 | dtype u8 (0 real f64, 1 complex f64
///   interleaved) | ndim u8 | ndim x u32 dims | payload f64 row-major.
/// Writes go to a temp file in the same directory and are renamed into
/// place, so readers never observe partial files.

void write_kten(const std::string& path, const Tensor& t);
void write_kten(const std::string& path, const CTensor& t);

/// Writes a small text file with the same temp + rename discipline.
void write_text(const std::string& path, const std::string& content);

struct KtenData {
    bool is_complex = false;
    Tensor real;
    CTensor cplx;
};

KtenData read_kten(const std::string& path);

/// Typed readers; throw when the file holds the other dtype.
Tensor read_kten_real(const std::string& path);
CTensor read_kten_complex(const std::string& path);

/// Sidecar metadata: one "key=value" per line, written atomically.  Order is
/// preserved on write; read returns a map and rejects duplicate keys.
void write_keyvals(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& kv);
std::map<std::string, std::string> read_keyvals(const std::string& path);

/// Formats a double with enough digits to round-trip exactly.
std::string fmt_double(double v);

} // namespace kunn
