#pragma once

// MSB-first bit I/O for JPEG entropy-coded scan data, including the
// 0xFF -> 0xFF 0x00 byte stuffing rule and restart-marker handling.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace jshield {

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  // Appends the low `count` bits of `bits`, most significant first.
  void put_bits(std::uint32_t bits, int count) {
    for (int i = count - 1; i >= 0; --i) {
      cur_ = static_cast<std::uint8_t>((cur_ << 1) | ((bits >> i) & 1u));
      if (++filled_ == 8) emit();
    }
  }

  // Pads the current byte with 1-bits, as required before markers.
  void align_with_ones() {
    while (filled_ != 0) {
      cur_ = static_cast<std::uint8_t>((cur_ << 1) | 1u);
      if (++filled_ == 8) emit();
    }
  }

 private:
  void emit() {
    out_.push_back(cur_);
    if (cur_ == 0xFF) out_.push_back(0x00);  // byte stuffing
    cur_ = 0;
    filled_ = 0;
  }

  std::vector<std::uint8_t>& out_;
  std::uint8_t cur_ = 0;
  int filled_ = 0;
};

// Reads scan data from a byte buffer. `base_offset` is the position of
// the buffer's first byte within the whole stream, so errors can quote
// absolute offsets.
class BitReader {
 public:
  BitReader(const std::uint8_t* data, std::size_t size, std::size_t base_offset)
      : data_(data), size_(size), base_(base_offset) {}

  int read_bit() {
    if (avail_ == 0) load_byte();
    --avail_;
    return (cur_ >> avail_) & 1;
  }

  // Reads `count` bits MSB-first (the RECEIVE procedure).
  std::uint32_t receive(int count) {
    std::uint32_t v = 0;
    for (int i = 0; i < count; ++i) v = (v << 1) | static_cast<std::uint32_t>(read_bit());
    return v;
  }

  // True when the next full bytes are a restart marker 0xFFD0..0xFFD7.
  bool at_restart_marker() const {
    return pos_ + 1 < size_ && data_[pos_] == 0xFF && data_[pos_ + 1] >= 0xD0 &&
           data_[pos_ + 1] <= 0xD7;
  }

  // Discards bits up to the byte boundary and consumes a restart marker,
  // returning its index 0..7.
  int consume_restart_marker() {
    avail_ = 0;
    if (pos_ + 1 >= size_) {
      throw std::runtime_error("truncated scan: expected restart marker at byte offset " +
                               std::to_string(base_ + pos_));
    }
    if (!at_restart_marker()) {
      throw std::runtime_error("corrupt scan: expected restart marker at byte offset " +
                               std::to_string(base_ + pos_));
    }
    const int index = data_[pos_ + 1] - 0xD0;
    pos_ += 2;
    return index;
  }

  // Offset (within the whole stream) of the next unread byte.
  std::size_t stream_offset() const { return base_ + pos_; }

 private:
  void load_byte() {
    if (pos_ >= size_) {
      throw std::runtime_error("truncated scan data at byte offset " +
                               std::to_string(base_ + pos_));
    }
    std::uint8_t b = data_[pos_++];
    if (b == 0xFF) {
      if (pos_ >= size_) {
        throw std::runtime_error("truncated scan data at byte offset " +
                                 std::to_string(base_ + pos_));
      }
      const std::uint8_t next = data_[pos_];
      if (next == 0x00) {
        ++pos_;  // stuffed byte: data value 0xFF
      } else {
        throw std::runtime_error(
            "unexpected marker 0xFF" + to_hex(next) +
            " inside scan data at byte offset " + std::to_string(base_ + pos_ - 1));
      }
    }
    cur_ = b;
    avail_ = 8;
  }

  static std::string to_hex(std::uint8_t b) {
    static const char* digits = "0123456789ABCDEF";
    return {digits[b >> 4], digits[b & 15]};
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t base_;
  std::size_t pos_ = 0;
  std::uint8_t cur_ = 0;
  int avail_ = 0;
};

}  // namespace jshield
