#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lpit/linalg.hpp"
#include "lpit/rng.hpp"

namespace lpit {

// File-system failures (unreadable instance, unwritable report directory).
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class SignalDistribution { Gaussian, Rademacher };

inline std::string_view to_string(SignalDistribution d) noexcept {
  return d == SignalDistribution::Gaussian ? "gaussian" : "rademacher";
}

inline SignalDistribution parse_signal_distribution(std::string_view s) {
  if (s == "gaussian") return SignalDistribution::Gaussian;
  if (s == "rademacher") return SignalDistribution::Rademacher;
  throw ContractViolation("unknown signal distribution '" + std::string(s) + "' (expected gaussian|rademacher)");
}

struct ProblemInstance {
  DenseMatrix a;
  Vector b;
  Vector x0;
  std::size_t sparsity = 0;
  std::uint64_t seed = 0;
  SignalDistribution signal = SignalDistribution::Gaussian;
};

// A has i.i.d. N(0,1) entries drawn row-major from one xoshiro256** stream;
// the same stream then picks r support positions (partial Fisher-Yates) and
// their values. b = A x0 with no noise.
inline ProblemInstance generate_instance(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed,
                                         SignalDistribution signal = SignalDistribution::Gaussian) {
  detail::require(m > 0 && r > 0, "generate_instance: m and r must be positive");
  detail::require(r <= m, "generate_instance: need r <= m (r=" + std::to_string(r) + ", m=" + std::to_string(m) + ")");
  detail::require(m < n, "generate_instance: need m < n (m=" + std::to_string(m) + ", n=" + std::to_string(n) + ")");

  Xoshiro256 rng(seed);
  Vector entries(m * n);
  for (auto& e : entries) e = rng.normal();

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < r; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  Vector x0(n, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    double v = 0.0;
    if (signal == SignalDistribution::Gaussian) {
      do {
        v = rng.normal();
      } while (v == 0.0);
    } else {
      v = rng.rademacher();
    }
    x0[idx[i]] = v;
  }

  ProblemInstance inst{DenseMatrix(m, n, std::move(entries)), {}, std::move(x0), r, seed, signal};
  inst.b = matvec(inst.a, inst.x0);
  return inst;
}

// Binary instance layout, all integers and doubles little-endian:
//   "LPITINST" | u32 version | u64 m | u64 n | u64 r | u64 seed
//   | u32 len + generator id | u32 len + normal method id | u32 len + signal id
//   | m*n f64 (A, row-major) | n f64 (x0)
// b is not stored; it is recomputed as A x0 on load.
namespace detail {

inline constexpr char kInstanceMagic[8] = {'L', 'P', 'I', 'T', 'I', 'N', 'S', 'T'};
inline constexpr std::uint32_t kInstanceVersion = 1;

static_assert(std::endian::native == std::endian::little, "instance I/O assumes a little-endian host");

template <class T>
void put(std::string& buf, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

inline void put_string(std::string& buf, std::string_view s) {
  put(buf, static_cast<std::uint32_t>(s.size()));
  buf.append(s);
}

class Reader {
public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_string() {
    const auto len = get<std::uint32_t>();
    need(len);
    std::string s(data_.substr(pos_, len));
    pos_ += len;
    return s;
  }

  void read_doubles(std::span<double> out) {
    need(out.size() * sizeof(double));
    std::memcpy(out.data(), data_.data() + pos_, out.size() * sizeof(double));
    pos_ += out.size() * sizeof(double);
  }

  [[nodiscard]] bool at_end() const noexcept { return pos_ == data_.size(); }

private:
  void need(std::size_t k) const {
    if (data_.size() - pos_ < k) throw ContractViolation("instance file truncated");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_instance(const ProblemInstance& inst) {
  std::string buf(detail::kInstanceMagic, sizeof(detail::kInstanceMagic));
  detail::put(buf, detail::kInstanceVersion);
  detail::put(buf, static_cast<std::uint64_t>(inst.a.rows()));
  detail::put(buf, static_cast<std::uint64_t>(inst.a.cols()));
  detail::put(buf, static_cast<std::uint64_t>(inst.sparsity));
  detail::put(buf, inst.seed);
  detail::put_string(buf, kGeneratorId);
  detail::put_string(buf, kNormalMethodId);
  detail::put_string(buf, to_string(inst.signal));
  for (double v : inst.a.entries()) detail::put(buf, v);
  for (double v : inst.x0) detail::put(buf, v);
  return buf;
}

inline ProblemInstance deserialize_instance(std::string_view data) {
  detail::Reader rd(data);
  char magic[8];
  for (char& c : magic) c = rd.get<char>();
  detail::require(std::memcmp(magic, detail::kInstanceMagic, 8) == 0, "instance file: bad magic");
  const auto version = rd.get<std::uint32_t>();
  detail::require(version == detail::kInstanceVersion,
                  "instance file: unsupported version " + std::to_string(version));
  const auto m = rd.get<std::uint64_t>();
  const auto n = rd.get<std::uint64_t>();
  const auto r = rd.get<std::uint64_t>();
  const auto seed = rd.get<std::uint64_t>();
  const std::string gen = rd.get_string();
  const std::string normal = rd.get_string();
  const std::string signal = rd.get_string();
  detail::require(gen == kGeneratorId, "instance file: unknown generator '" + gen + "'");
  detail::require(normal == kNormalMethodId, "instance file: unknown normal method '" + normal + "'");
  detail::require(m > 0 && n > 0 && m < n && r > 0 && r <= m, "instance file: invalid dimensions");
  detail::require(m * n < (std::size_t{1} << 32), "instance file: matrix too large");

  Vector entries(m * n);
  rd.read_doubles(entries);
  Vector x0(n);
  rd.read_doubles(x0);
  detail::require(rd.at_end(), "instance file: trailing bytes");
  detail::require(detail::all_finite(x0), "instance file: x0 contains non-finite values");

  ProblemInstance inst{DenseMatrix(m, n, std::move(entries)), {}, std::move(x0), r, seed,
                       parse_signal_distribution(signal)};
  detail::require(support_size(inst.x0) == r, "instance file: x0 support size does not match r");
  inst.b = matvec(inst.a, inst.x0);
  detail::require(detail::all_finite(inst.b), "instance file: b = A x0 is not finite");
  return inst;
}

inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on '" + path.string() + "'");
  return data;
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

// Returns the FNV-1a 64 checksum of the bytes written.
inline std::uint64_t save_instance(const ProblemInstance& inst, const std::filesystem::path& path) {
  const std::string buf = serialize_instance(inst);
  write_file(path, buf);
  return fnv1a64(buf);
}

inline ProblemInstance load_instance(const std::filesystem::path& path) {
  return deserialize_instance(read_file(path));
}

}  // namespace lpit
