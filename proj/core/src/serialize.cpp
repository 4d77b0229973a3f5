#include "sebcomm/serialize.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sebcomm/errors.hpp"

namespace sebcomm {

namespace {

void put_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IngestError("truncated " + what);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& out, float v) {
  uint32_t u;
  std::memcpy(&u, &v, 4);
  put_u32(out, u);
}

float get_f32(std::istream& in, const std::string& what) {
  const uint32_t u = get_u32(in, what);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

void put_i32(std::ostream& out, int32_t v) { put_u32(out, static_cast<uint32_t>(v)); }
int32_t get_i32(std::istream& in, const std::string& what) {
  return static_cast<int32_t>(get_u32(in, what));
}

void put_magic(std::ostream& out, const char* magic) { out.write(magic, 4); }

void expect_magic(std::istream& in, const char* magic, const std::string& path) {
  char b[4];
  if (!in.read(b, 4) || std::memcmp(b, magic, 4) != 0)
    throw IngestError(path + ": bad magic, expected " + magic);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot read " + path);
  return in;
}

int bits_per_index(int K) {
  int b = 0;
  while ((1 << b) < K) ++b;
  return b;
}

class BitWriter {
 public:
  explicit BitWriter(std::ostream& out) : out_(out) {}
  void put(uint32_t value, int bits) {  // MSB first
    for (int i = bits - 1; i >= 0; --i) {
      acc_ = static_cast<unsigned char>((acc_ << 1) | ((value >> i) & 1u));
      if (++filled_ == 8) flush_byte();
    }
  }
  void pad() {
    if (filled_ > 0) {
      acc_ = static_cast<unsigned char>(acc_ << (8 - filled_));
      filled_ = 8;
      flush_byte();
    }
  }

 private:
  void flush_byte() {
    out_.put(static_cast<char>(acc_));
    acc_ = 0;
    filled_ = 0;
  }
  std::ostream& out_;
  unsigned char acc_ = 0;
  int filled_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::istream& in, const std::string& path) : in_(in), path_(path) {}
  uint32_t get(int bits) {
    uint32_t v = 0;
    for (int i = 0; i < bits; ++i) {
      if (left_ == 0) {
        int c = in_.get();
        if (c == EOF) throw IngestError(path_ + ": truncated index payload");
        acc_ = static_cast<unsigned char>(c);
        left_ = 8;
      }
      v = (v << 1) | ((acc_ >> (left_ - 1)) & 1u);
      --left_;
    }
    return v;
  }

 private:
  std::istream& in_;
  std::string path_;
  unsigned char acc_ = 0;
  int left_ = 0;
};

}  // namespace

void write_codebook(const std::string& path, const SebCodebook& book) {
  if (book.sebs.empty()) throw ParameterError("write codebook: empty codebook");
  const auto& s = book.sebs[0].shape;
  if (s.size() != 3) throw ShapeError("write codebook: sebs must be [c',h',w']");
  auto out = open_out(path);
  put_magic(out, "SEB1");
  put_u32(out, static_cast<uint32_t>(book.K));
  put_u32(out, static_cast<uint32_t>(s[0]));
  put_u32(out, static_cast<uint32_t>(s[1]));
  put_u32(out, static_cast<uint32_t>(s[2]));
  for (const auto& seb : book.sebs) {
    if (seb.shape != s) throw ShapeError("write codebook: mixed seb shapes");
    for (float v : seb.data) put_f32(out, v);
  }
  if (!out) throw IngestError("write failed on " + path);
}

SebCodebook read_codebook(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "SEB1", path);
  SebCodebook book;
  book.K = static_cast<int>(get_u32(in, path));
  const int c = static_cast<int>(get_u32(in, path));
  const int h = static_cast<int>(get_u32(in, path));
  const int w = static_cast<int>(get_u32(in, path));
  if (book.K <= 0 || c <= 0 || h <= 0 || w <= 0) throw IngestError(path + ": bad header");
  book.sebs.reserve(static_cast<size_t>(book.K));
  for (int k = 0; k < book.K; ++k) {
    Tensor t({c, h, w});
    for (auto& v : t.data) v = get_f32(in, path);
    book.sebs.push_back(std::move(t));
  }
  return book;
}

void write_usage(const std::string& path, const UsageMap& usage) {
  if (usage.K < 1) throw ParameterError("write usage: K must be at least 1");
  auto out = open_out(path);
  put_magic(out, "SEBA");
  put_u32(out, static_cast<uint32_t>(usage.n_images()));
  put_u32(out, static_cast<uint32_t>(usage.n_p()));
  put_u32(out, static_cast<uint32_t>(usage.K));
  const int bits = bits_per_index(usage.K);
  BitWriter bw(out);
  for (const auto& row : usage.indices) {
    if (static_cast<int>(row.size()) != usage.n_p())
      throw StructuralError("write usage: ragged index rows");
    for (int idx : row) {
      if (idx < 0 || idx >= usage.K)
        throw StructuralError("write usage: index " + std::to_string(idx) + " out of range");
      bw.put(static_cast<uint32_t>(idx), bits);
    }
  }
  bw.pad();
  if (!out) throw IngestError("write failed on " + path);
}

UsageMap read_usage(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "SEBA", path);
  UsageMap usage;
  const int n = static_cast<int>(get_u32(in, path));
  const int n_p = static_cast<int>(get_u32(in, path));
  usage.K = static_cast<int>(get_u32(in, path));
  if (n < 0 || n_p < 0 || usage.K < 1) throw IngestError(path + ": bad header");
  const int bits = bits_per_index(usage.K);
  BitReader br(in, path);
  usage.indices.assign(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n_p)));
  for (auto& row : usage.indices)
    for (auto& idx : row) {
      idx = static_cast<int>(br.get(bits));
      if (idx >= usage.K) throw IngestError(path + ": index outside codebook");
    }
  return usage;
}

void write_latent_records(const std::string& path, const std::vector<Tensor>& latents) {
  auto out = open_out(path);
  for (const auto& t : latents) {
    if (t.ndim() != 3) throw ShapeError("write latents: records must be [c,h,w]");
    put_magic(out, "SEBZ");
    put_u32(out, static_cast<uint32_t>(t.dim(0)));
    put_u32(out, static_cast<uint32_t>(t.dim(1)));
    put_u32(out, static_cast<uint32_t>(t.dim(2)));
    for (float v : t.data) put_i32(out, static_cast<int32_t>(std::lrint(v)));
  }
  if (!out) throw IngestError("write failed on " + path);
}

std::vector<Tensor> read_latent_records(const std::string& path) {
  auto in = open_in(path);
  std::vector<Tensor> out;
  while (in.peek() != EOF) {
    expect_magic(in, "SEBZ", path);
    const int c = static_cast<int>(get_u32(in, path));
    const int h = static_cast<int>(get_u32(in, path));
    const int w = static_cast<int>(get_u32(in, path));
    if (c <= 0 || h <= 0 || w <= 0) throw IngestError(path + ": bad record header");
    Tensor t({c, h, w});
    for (auto& v : t.data) v = static_cast<float>(get_i32(in, path));
    out.push_back(std::move(t));
  }
  return out;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  auto out = open_out(path);
  put_magic(out, "SEBC");
  put_u32(out, static_cast<uint32_t>(ckpt.hyper_json.size()));
  out.write(ckpt.hyper_json.data(), static_cast<std::streamsize>(ckpt.hyper_json.size()));
  put_u32(out, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, tensor] : ckpt.tensors) {
    put_u32(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<uint32_t>(tensor.ndim()));
    for (int d : tensor.shape) put_u32(out, static_cast<uint32_t>(d));
    for (float v : tensor.data) put_f32(out, v);
  }
  if (!out) throw IngestError("write failed on " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "SEBC", path);
  Checkpoint ckpt;
  const uint32_t jlen = get_u32(in, path);
  ckpt.hyper_json.resize(jlen);
  if (jlen && !in.read(ckpt.hyper_json.data(), jlen)) throw IngestError(path + ": truncated");
  const uint32_t count = get_u32(in, path);
  ckpt.tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t nlen = get_u32(in, path);
    std::string name(nlen, '\0');
    if (nlen && !in.read(name.data(), nlen)) throw IngestError(path + ": truncated");
    const uint32_t ndim = get_u32(in, path);
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = static_cast<int>(get_u32(in, path));
    Tensor t(shape);
    for (auto& v : t.data) v = get_f32(in, path);
    ckpt.tensors.emplace_back(std::move(name), std::move(t));
  }
  return ckpt;
}

void write_embeddings(const std::string& path, const Eigen::MatrixXd& rows) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write " + path);
  out << rows.rows() << " " << rows.cols() << "\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) out << (j ? " " : "") << rows(i, j);
    out << "\n";
  }
  if (!out) throw IngestError("write failed on " + path);
}

}  // namespace sebcomm
