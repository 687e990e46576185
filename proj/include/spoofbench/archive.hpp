#pragma once

// Store-only ZIP container codec. Samples are plain ZIP archives (method 0,
// no ZIP64, constant timestamps), which keeps serialization byte-deterministic
// and round-trips bit-exactly while staying readable by stock unzip tools.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "spoofbench/errors.hpp"
#include "spoofbench/rng.hpp"
#include "spoofbench/util.hpp"

namespace spoofbench {

struct ArchiveEntry {
  std::string path;     // UTF-8, '/' separators, no ".." segments
  Bytes bytes;
  std::uint32_t crc{};  // always crc32(bytes)

  ArchiveEntry() = default;
  ArchiveEntry(std::string p, Bytes b)
      : path(std::move(p)), bytes(std::move(b)), crc(crc32(bytes)) {}

  bool operator==(const ArchiveEntry& o) const {
    return path == o.path && bytes == o.bytes && crc == o.crc;
  }
};

struct Archive {
  std::vector<ArchiveEntry> entries;

  bool operator==(const Archive& o) const { return entries == o.entries; }

  const ArchiveEntry* find(std::string_view path) const {
    for (const auto& e : entries)
      if (e.path == path) return &e;
    return nullptr;
  }

  bool has(std::string_view path) const { return find(path) != nullptr; }

  Archive with_entry(std::string path, Bytes bytes) const {
    Archive out = *this;
    out.entries.emplace_back(std::move(path), std::move(bytes));
    return out;
  }

  Archive without_entry(std::string_view path) const {
    Archive out;
    for (const auto& e : entries)
      if (e.path != path) out.entries.push_back(e);
    return out;
  }
};

namespace detail {

inline void validate_entry_path(const std::string& path) {
  if (path.empty()) throw InvariantError("empty entry path");
  if (path.find('\\') != std::string::npos)
    throw InvariantError("backslash in entry path: " + path);
  for (const auto& seg : split_on(path, '/'))
    if (seg == "..") throw InvariantError("'..' segment in entry path: " + path);
}

inline void validate_archive(const Archive& a) {
  std::unordered_set<std::string> seen;
  for (const auto& e : a.entries) {
    validate_entry_path(e.path);
    if (!seen.insert(e.path).second)
      throw InvariantError("duplicate entry path: " + e.path);
    if (e.crc != crc32(e.bytes))
      throw IntegrityError("stale crc32 for entry " + e.path);
  }
}

inline void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct ByteReader {
  const Bytes& data;
  std::size_t pos = 0;

  std::uint16_t u16() {
    require(2);
    std::uint16_t v = static_cast<std::uint16_t>(data[pos] | (data[pos + 1] << 8));
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::string str(std::size_t n) {
    require(n);
    std::string s(data.begin() + static_cast<long>(pos),
                  data.begin() + static_cast<long>(pos + n));
    pos += n;
    return s;
  }
  Bytes raw(std::size_t n) {
    require(n);
    Bytes b(data.begin() + static_cast<long>(pos),
            data.begin() + static_cast<long>(pos + n));
    pos += n;
    return b;
  }
  void skip(std::size_t n) {
    require(n);
    pos += n;
  }
  void require(std::size_t n) const {
    if (pos + n > data.size())
      throw ParseError("truncated input at byte offset " + std::to_string(pos));
  }
};

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::uint16_t kVersion = 20;
constexpr std::uint16_t kFlagsUtf8 = 0x0800;
constexpr std::uint16_t kDosDateEpoch = 0x0021;  // 1980-01-01

}  // namespace detail

inline Bytes write_archive(const Archive& a) {
  detail::validate_archive(a);
  if (a.entries.size() > 0xffff)
    throw UnsupportedError("archive needs ZIP64 (too many entries)");
  using namespace detail;
  Bytes out;
  std::vector<std::uint32_t> offsets;
  offsets.reserve(a.entries.size());
  for (const auto& e : a.entries) {
    if (e.bytes.size() > 0xfffffffful)
      throw UnsupportedError("entry needs ZIP64 (too large): " + e.path);
    offsets.push_back(static_cast<std::uint32_t>(out.size()));
    put_u32(out, kLocalSig);
    put_u16(out, kVersion);
    put_u16(out, kFlagsUtf8);
    put_u16(out, 0);  // method: store
    put_u16(out, 0);  // mod time
    put_u16(out, kDosDateEpoch);
    put_u32(out, e.crc);
    put_u32(out, static_cast<std::uint32_t>(e.bytes.size()));
    put_u32(out, static_cast<std::uint32_t>(e.bytes.size()));
    put_u16(out, static_cast<std::uint16_t>(e.path.size()));
    put_u16(out, 0);  // extra length
    out.insert(out.end(), e.path.begin(), e.path.end());
    out.insert(out.end(), e.bytes.begin(), e.bytes.end());
  }
  std::uint32_t cd_offset = static_cast<std::uint32_t>(out.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& e = a.entries[i];
    put_u32(out, kCentralSig);
    put_u16(out, kVersion);  // version made by
    put_u16(out, kVersion);  // version needed
    put_u16(out, kFlagsUtf8);
    put_u16(out, 0);
    put_u16(out, 0);
    put_u16(out, kDosDateEpoch);
    put_u32(out, e.crc);
    put_u32(out, static_cast<std::uint32_t>(e.bytes.size()));
    put_u32(out, static_cast<std::uint32_t>(e.bytes.size()));
    put_u16(out, static_cast<std::uint16_t>(e.path.size()));
    put_u16(out, 0);  // extra
    put_u16(out, 0);  // comment
    put_u16(out, 0);  // disk number
    put_u16(out, 0);  // internal attrs
    put_u32(out, 0);  // external attrs
    put_u32(out, offsets[i]);
    out.insert(out.end(), e.path.begin(), e.path.end());
  }
  std::uint32_t cd_size = static_cast<std::uint32_t>(out.size()) - cd_offset;
  put_u32(out, kEndSig);
  put_u16(out, 0);
  put_u16(out, 0);
  put_u16(out, static_cast<std::uint16_t>(a.entries.size()));
  put_u16(out, static_cast<std::uint16_t>(a.entries.size()));
  put_u32(out, cd_size);
  put_u32(out, cd_offset);
  put_u16(out, 0);  // comment length
  return out;
}

inline Archive parse_archive(const Bytes& data) {
  using namespace detail;
  if (data.size() < 22) throw ParseError("input shorter than end-of-central-directory");
  // End record has no fixed position when a comment trails it; scan backwards.
  std::size_t eocd = std::string::npos;
  std::size_t scan_floor = data.size() >= 22 + 0xffff ? data.size() - 22 - 0xffff : 0;
  for (std::size_t i = data.size() - 22 + 1; i-- > scan_floor;) {
    if (data[i] == 0x50 && data[i + 1] == 0x4b && data[i + 2] == 0x05 &&
        data[i + 3] == 0x06) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string::npos)
    throw ParseError("end-of-central-directory signature not found");

  ByteReader end{data, eocd};
  end.u32();  // signature
  if (end.u16() != 0 || end.u16() != 0)
    throw UnsupportedError("multi-disk archives not supported");
  std::uint16_t count_disk = end.u16();
  std::uint16_t count_total = end.u16();
  if (count_disk != count_total)
    throw ParseError("inconsistent entry counts at byte offset " + std::to_string(eocd));
  if (count_total == 0xffff)
    throw UnsupportedError("archive requires ZIP64");
  end.u32();  // central directory size
  std::uint32_t cd_offset = end.u32();
  if (cd_offset == 0xffffffffu) throw UnsupportedError("archive requires ZIP64");
  if (cd_offset > eocd)
    throw ParseError("central directory offset past end record at byte offset " +
                     std::to_string(eocd));

  struct CentralRec {
    std::string path;
    std::uint32_t crc;
    std::uint32_t size;
    std::uint32_t local_offset;
  };
  std::vector<CentralRec> recs;
  ByteReader cd{data, cd_offset};
  for (std::uint16_t i = 0; i < count_total; ++i) {
    std::size_t rec_at = cd.pos;
    if (cd.u32() != kCentralSig)
      throw ParseError("bad central header signature at byte offset " +
                       std::to_string(rec_at));
    cd.u16();  // version made by
    cd.u16();  // version needed
    cd.u16();  // flags
    std::uint16_t method = cd.u16();
    if (method != 0)
      throw UnsupportedError("compression method " + std::to_string(method) +
                             " (only store is supported)");
    cd.u16();
    cd.u16();
    std::uint32_t crc = cd.u32();
    std::uint32_t csize = cd.u32();
    std::uint32_t usize = cd.u32();
    if (csize != usize)
      throw ParseError("stored entry with mismatched sizes at byte offset " +
                       std::to_string(rec_at));
    std::uint16_t name_len = cd.u16();
    std::uint16_t extra_len = cd.u16();
    std::uint16_t comment_len = cd.u16();
    cd.u16();  // disk
    cd.u16();  // internal attrs
    cd.u32();  // external attrs
    std::uint32_t local_offset = cd.u32();
    std::string name = cd.str(name_len);
    cd.skip(extra_len);
    cd.skip(comment_len);
    recs.push_back({std::move(name), crc, usize, local_offset});
  }

  Archive out;
  out.entries.reserve(recs.size());
  for (const auto& rec : recs) {
    ByteReader lf{data, rec.local_offset};
    std::size_t rec_at = lf.pos;
    if (lf.u32() != kLocalSig)
      throw ParseError("bad local header signature at byte offset " +
                       std::to_string(rec_at));
    lf.u16();  // version
    lf.u16();  // flags
    std::uint16_t method = lf.u16();
    if (method != 0)
      throw UnsupportedError("compression method " + std::to_string(method) +
                             " (only store is supported)");
    lf.u16();
    lf.u16();
    lf.u32();  // crc (central copy is authoritative)
    lf.u32();
    lf.u32();
    std::uint16_t name_len = lf.u16();
    std::uint16_t extra_len = lf.u16();
    std::string name = lf.str(name_len);
    if (name != rec.path)
      throw ParseError("local/central name mismatch at byte offset " +
                       std::to_string(rec_at));
    lf.skip(extra_len);
    Bytes content = lf.raw(rec.size);
    if (crc32(content) != rec.crc)
      throw IntegrityError("CRC mismatch for entry " + rec.path);
    ArchiveEntry e;
    e.path = rec.path;
    e.bytes = std::move(content);
    e.crc = rec.crc;
    out.entries.push_back(std::move(e));
  }
  detail::validate_archive(out);
  return out;
}

// Fractional size change between two serialized archives. An entry-less
// baseline is degenerate (its 22 bytes are pure container framing).
inline double size_delta(const Archive& before, const Archive& after) {
  if (before.entries.empty())
    throw DegenerateInputError("size_delta against an empty archive");
  double b = static_cast<double>(write_archive(before).size());
  double a = static_cast<double>(write_archive(after).size());
  return (a - b) / b;
}

struct MalwareCatalogEntry;  // catalog.hpp

// Adds one payload entry under `dir` without touching anything else.
// Feature extractors never look below res/, which is the whole point.
inline Archive inject_entry_raw(const Archive& a, const std::string& filename,
                                const Bytes& payload, const std::string& dir,
                                std::uint64_t seed,
                                const std::vector<std::string>& allowed_roots = {"res/"}) {
  std::string root = dir;
  if (!root.empty() && root.back() != '/') root += '/';
  if (root.empty() || root == "/" || root == "./")
    throw ForbiddenLocationError("injection at archive root is visible to extractors");
  if (root == "classes.dexl/" || root.rfind("classes.dexl", 0) == 0)
    throw ForbiddenLocationError("injection targets classes.dexl");
  if (std::find(allowed_roots.begin(), allowed_roots.end(), root) == allowed_roots.end())
    throw ForbiddenLocationError("injection root not allowed: " + root);

  std::string path = root + filename;
  if (a.has(path)) {
    // Deterministic de-collision: seed-derived numeric suffix before the
    // extension, bumped until free.
    std::uint64_t n = Rng(seed).split("inject-suffix").bounded(90000) + 10000;
    std::string stem = filename, ext;
    if (auto dot = filename.rfind('.'); dot != std::string::npos && dot > 0) {
      stem = filename.substr(0, dot);
      ext = filename.substr(dot);
    }
    do {
      path = root + stem + "-" + std::to_string(n) + ext;
      ++n;
    } while (a.has(path));
  }
  detail::validate_entry_path(path);
  return a.with_entry(std::move(path), payload);
}

}  // namespace spoofbench
