#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "mec/nn.hpp"

namespace mec {

// Raw little-endian tensor blocks: int64 rows, int64 cols, then the payload.
// Readers know the architecture, so shapes are validated rather than trusted.
inline void write_tensor(std::ostream& out, const Mat<float>& m) {
  const std::int64_t r = m.rows(), c = m.cols();
  out.write(reinterpret_cast<const char*>(&r), sizeof(r));
  out.write(reinterpret_cast<const char*>(&c), sizeof(c));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(float) * m.size()));
}

inline void read_tensor(std::istream& in, Mat<float>& m) {
  std::int64_t r = 0, c = 0;
  in.read(reinterpret_cast<char*>(&r), sizeof(r));
  in.read(reinterpret_cast<char*>(&c), sizeof(c));
  if (!in || r != m.rows() || c != m.cols())
    throw std::runtime_error("model checkpoint does not match architecture");
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(float) * m.size()));
  if (!in) throw std::runtime_error("truncated model checkpoint");
}

inline void write_mlp(std::ostream& out, const MLP<float>& net) {
  for (const Mat<float>* p : net.params()) write_tensor(out, *p);
}

inline void read_mlp(std::istream& in, MLP<float>& net) {
  for (Mat<float>* p : net.params()) read_tensor(in, *p);
}

}  // namespace mec
