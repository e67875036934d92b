#include "dam/pattern_io.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dam {

namespace {

constexpr std::array<char, 4> kMagic{'D', 'M', 'P', 'S'};

template <typename UInt>
void put_le(std::ostream& out, UInt v) {
  std::array<char, sizeof(UInt)> buf{};
  for (std::size_t b = 0; b < sizeof(UInt); ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xFF);
  out.write(buf.data(), buf.size());
}

template <typename UInt>
UInt get_le(std::istream& in) {
  std::array<unsigned char, sizeof(UInt)> buf{};
  if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
    throw std::runtime_error("pattern store: truncated header");
  }
  UInt v = 0;
  for (std::size_t b = 0; b < sizeof(UInt); ++b) v |= static_cast<UInt>(buf[b]) << (8 * b);
  return v;
}

}  // namespace

void write_store_binary(std::ostream& out, const PatternStore& store) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(out, kStoreFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(store.n_neurons()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(store.n_patterns()));
  const std::size_t n = store.n_neurons();
  std::vector<char> row((n + 7) / 8);
  for (std::size_t mu = 0; mu < store.n_patterns(); ++mu) {
    std::fill(row.begin(), row.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (store.bit(mu, i)) row[i / 8] = static_cast<char>(row[i / 8] | (0x80 >> (i % 8)));
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw std::runtime_error("pattern store: write failed");
}

PatternStore read_store_binary(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("pattern store: bad magic");
  }
  const auto version = get_le<std::uint16_t>(in);
  if (version != kStoreFormatVersion) {
    throw std::runtime_error("pattern store: unsupported version " + std::to_string(version));
  }
  const std::size_t n = get_le<std::uint32_t>(in);
  const std::size_t m = get_le<std::uint32_t>(in);
  if (n == 0 || m == 0) throw std::runtime_error("pattern store: N and M must be positive");

  const std::size_t stride = words_for(n);
  std::vector<std::uint64_t> words(m * stride, 0);
  std::vector<unsigned char> row((n + 7) / 8);
  for (std::size_t mu = 0; mu < m; ++mu) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()))) {
      throw std::runtime_error("pattern store: truncated at pattern " + std::to_string(mu));
    }
    for (std::size_t i = 0; i < row.size() * 8; ++i) {
      const bool set = (row[i / 8] >> (7 - i % 8)) & 1U;
      if (!set) continue;
      if (i >= n) throw std::runtime_error("pattern store: nonzero padding bits");
      words[mu * stride + (i >> 6)] |= std::uint64_t{1} << (i & 63);
    }
  }
  return PatternStore(n, m, std::move(words));
}

void write_store_text(std::ostream& out, const PatternStore& store) {
  std::string line(store.n_neurons(), '-');
  for (std::size_t mu = 0; mu < store.n_patterns(); ++mu) {
    for (std::size_t i = 0; i < store.n_neurons(); ++i) line[i] = store.bit(mu, i) ? '+' : '-';
    out << line << '\n';
  }
}

PatternStore read_store_text(std::istream& in) {
  std::vector<Pattern> patterns;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<int> spins;
    spins.reserve(line.size());
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (line[c] == '+') {
        spins.push_back(1);
      } else if (line[c] == '-') {
        spins.push_back(-1);
      } else if (line.compare(c, 3, "\xE2\x88\x92") == 0) {  // U+2212
        spins.push_back(-1);
        c += 2;
      } else {
        throw std::runtime_error("pattern text: bad character on line " + std::to_string(line_no));
      }
    }
    if (!patterns.empty() && spins.size() != patterns.front().size()) {
      throw std::runtime_error("pattern text: line " + std::to_string(line_no) + " has a different length");
    }
    patterns.push_back(Pattern::from_spins(spins));
  }
  if (patterns.empty()) throw std::runtime_error("pattern text: no patterns");
  return PatternStore(patterns);
}

}  // namespace dam
