#pragma once

// Canonical Huffman coding of quantized 8x8 coefficient blocks:
// DC difference categories, AC run/size symbols with ZRL (0xF0) and
// EOB (0x00), per ITU-T T.81 section F.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "jshield/jpeg_bitio.hpp"
#include "jshield/jpeg_tables.hpp"

namespace jshield {

// Encoder-side table: code and code length per symbol.
struct HuffmanEncoder {
  std::uint16_t code[256] = {};
  std::uint8_t length[256] = {};

  HuffmanEncoder() = default;
  HuffmanEncoder(const std::uint8_t bits[16], const std::uint8_t* values) {
    std::uint16_t next_code = 0;
    int k = 0;
    for (int len = 1; len <= 16; ++len) {
      for (int i = 0; i < bits[len - 1]; ++i) {
        const std::uint8_t symbol = values[k++];
        code[symbol] = next_code++;
        length[symbol] = static_cast<std::uint8_t>(len);
      }
      next_code = static_cast<std::uint16_t>(next_code << 1);
    }
  }

  void put(BitWriter& writer, std::uint8_t symbol) const {
    if (length[symbol] == 0) {
      throw std::logic_error("symbol " + std::to_string(symbol) +
                             " has no code in this Huffman table");
    }
    writer.put_bits(code[symbol], length[symbol]);
  }
};

// Decoder-side table (the MINCODE/MAXCODE/VALPTR scheme of T.81 F.2.2.3).
struct HuffmanDecoder {
  std::int32_t min_code[17] = {};
  std::int32_t max_code[17] = {};  // -1 where no codes of that length exist
  std::int32_t val_ptr[17] = {};
  std::vector<std::uint8_t> values;

  HuffmanDecoder() = default;
  HuffmanDecoder(const std::uint8_t bits[16], const std::uint8_t* vals,
                 std::size_t value_count)
      : values(vals, vals + value_count) {
    std::int32_t code = 0;
    std::size_t k = 0;
    for (int len = 1; len <= 16; ++len) {
      if (bits[len - 1] == 0) {
        max_code[len] = -1;
      } else {
        val_ptr[len] = static_cast<std::int32_t>(k);
        min_code[len] = code;
        k += bits[len - 1];
        code += bits[len - 1];
        max_code[len] = code - 1;
      }
      code <<= 1;
    }
    if (k != values.size()) {
      throw std::invalid_argument("Huffman table: BITS counts " + std::to_string(k) +
                                  " codes but " + std::to_string(values.size()) +
                                  " values were supplied");
    }
  }

  bool empty() const { return values.empty(); }

  std::uint8_t decode(BitReader& reader) const {
    std::int32_t code = reader.read_bit();
    for (int len = 1; len <= 16; ++len) {
      if (max_code[len] >= 0 && code <= max_code[len]) {
        return values[static_cast<std::size_t>(val_ptr[len] + code - min_code[len])];
      }
      code = (code << 1) | reader.read_bit();
    }
    throw std::runtime_error("corrupt scan: invalid Huffman code at byte offset " +
                             std::to_string(reader.stream_offset()));
  }
};

// Magnitude category: the number of bits needed for |v| (0 for v = 0).
inline int coefficient_size(int v) {
  int magnitude = v < 0 ? -v : v;
  int size = 0;
  while (magnitude != 0) {
    magnitude >>= 1;
    ++size;
  }
  return size;
}

// The EXTEND procedure: maps `size` received bits back to a signed value.
inline int extend_received(std::uint32_t received, int size) {
  if (size == 0) return 0;
  const std::int32_t v = static_cast<std::int32_t>(received);
  if (v < (1 << (size - 1))) return v - (1 << size) + 1;
  return v;
}

// Encodes one quantized block (natural order) with DC prediction.
// `dc_pred` holds the previous DC value of the same component and is
// updated in place.
inline void huffman_encode_block(BitWriter& writer, const int block[64], int& dc_pred,
                                 const HuffmanEncoder& dc_table,
                                 const HuffmanEncoder& ac_table) {
  const int diff = block[0] - dc_pred;
  dc_pred = block[0];
  const int dc_size = coefficient_size(diff);
  if (dc_size > 11) {
    throw std::invalid_argument("DC difference " + std::to_string(diff) +
                                " out of range for baseline coding");
  }
  dc_table.put(writer, static_cast<std::uint8_t>(dc_size));
  if (dc_size > 0) {
    const std::uint32_t bits =
        diff < 0 ? static_cast<std::uint32_t>(diff + (1 << dc_size) - 1)
                 : static_cast<std::uint32_t>(diff);
    writer.put_bits(bits, dc_size);
  }

  int run = 0;
  for (int k = 1; k < 64; ++k) {
    const int v = block[kZigzag[k]];
    if (v == 0) {
      ++run;
      continue;
    }
    while (run > 15) {
      ac_table.put(writer, 0xF0);  // ZRL: sixteen zeros
      run -= 16;
    }
    const int size = coefficient_size(v);
    if (size > 10) {
      throw std::invalid_argument("AC coefficient " + std::to_string(v) +
                                  " out of range for baseline coding");
    }
    ac_table.put(writer, static_cast<std::uint8_t>((run << 4) | size));
    const std::uint32_t bits = v < 0 ? static_cast<std::uint32_t>(v + (1 << size) - 1)
                                     : static_cast<std::uint32_t>(v);
    writer.put_bits(bits, size);
    run = 0;
  }
  if (run > 0) ac_table.put(writer, 0x00);  // EOB
}

// Decodes one block into natural order, updating `dc_pred`.
inline void huffman_decode_block(BitReader& reader, int block[64], int& dc_pred,
                                 const HuffmanDecoder& dc_table,
                                 const HuffmanDecoder& ac_table) {
  for (int i = 0; i < 64; ++i) block[i] = 0;

  const int dc_size = dc_table.decode(reader);
  if (dc_size > 11) {
    throw std::runtime_error("corrupt scan: DC category " + std::to_string(dc_size) +
                             " at byte offset " + std::to_string(reader.stream_offset()));
  }
  dc_pred += extend_received(reader.receive(dc_size), dc_size);
  block[0] = dc_pred;

  int k = 1;
  while (k < 64) {
    const std::uint8_t symbol = ac_table.decode(reader);
    const int run = symbol >> 4;
    const int size = symbol & 15;
    if (size == 0) {
      if (symbol == 0x00) break;  // EOB
      if (symbol == 0xF0) {       // ZRL
        k += 16;
        continue;
      }
      throw std::runtime_error("corrupt scan: AC symbol " + std::to_string(symbol) +
                               " at byte offset " + std::to_string(reader.stream_offset()));
    }
    k += run;
    if (k > 63) {
      throw std::runtime_error("corrupt scan: coefficient index " + std::to_string(k) +
                               " out of range at byte offset " +
                               std::to_string(reader.stream_offset()));
    }
    block[kZigzag[k]] = extend_received(reader.receive(size), size);
    ++k;
  }
}

}  // namespace jshield
