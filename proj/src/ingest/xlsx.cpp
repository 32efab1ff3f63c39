#include <zlib.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <sstream>

#include "facdash/error.hpp"
#include "facdash/ingest/table.hpp"

namespace facdash::ingest {
namespace {

namespace pt = boost::property_tree;

// Decompressed size cap for any single part; guards against zip bombs.
constexpr std::uint64_t kMaxPartBytes = 256ull << 20;

[[noreturn]] void unreadable(const std::string& why) {
  throw Error(ErrorCode::unreadable_payload, "not a readable xlsx workbook: " + why);
}

std::uint32_t le32(std::string_view b, std::size_t at) {
  if (at + 4 > b.size()) unreadable("truncated archive");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[at + static_cast<std::size_t>(i)]);
  return v;
}

std::uint16_t le16(std::string_view b, std::size_t at) {
  if (at + 2 > b.size()) unreadable("truncated archive");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

// ---------------------------------------------------------------------------
// zip container

class ZipReader {
 public:
  explicit ZipReader(std::string_view bytes) : bytes_(bytes) {
    if (bytes.size() < 22) unreadable("too short");
    std::size_t eocd = std::string_view::npos;
    std::size_t lowest = bytes.size() > 22 + 0xFFFF ? bytes.size() - 22 - 0xFFFF : 0;
    for (std::size_t at = bytes.size() - 22 + 1; at-- > lowest;) {
      if (le32(bytes, at) == 0x06054b50) {
        eocd = at;
        break;
      }
    }
    if (eocd == std::string_view::npos) unreadable("no end of central directory");
    std::size_t count = le16(bytes, eocd + 10);
    std::size_t at = le32(bytes, eocd + 16);
    for (std::size_t i = 0; i < count; ++i) {
      if (le32(bytes, at) != 0x02014b50) unreadable("corrupt central directory");
      Entry e;
      e.method = le16(bytes, at + 10);
      e.crc = le32(bytes, at + 16);
      e.compressed = le32(bytes, at + 20);
      e.size = le32(bytes, at + 24);
      std::size_t name_len = le16(bytes, at + 28);
      std::size_t extra_len = le16(bytes, at + 30);
      std::size_t comment_len = le16(bytes, at + 32);
      e.local_offset = le32(bytes, at + 42);
      if (at + 46 + name_len > bytes.size()) unreadable("truncated central directory");
      std::string name(bytes.substr(at + 46, name_len));
      entries_.emplace(std::move(name), e);
      at += 46 + name_len + extra_len + comment_len;
    }
  }

  bool has(const std::string& name) const { return entries_.count(name) != 0; }

  std::string read(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) unreadable("missing part " + name);
    const Entry& e = it->second;
    std::size_t at = e.local_offset;
    if (le32(bytes_, at) != 0x04034b50) unreadable("corrupt local header");
    std::size_t data = at + 30 + le16(bytes_, at + 26) + le16(bytes_, at + 28);
    if (data + e.compressed > bytes_.size()) unreadable("truncated entry " + name);
    if (e.size > kMaxPartBytes) unreadable("part too large");
    auto raw = bytes_.substr(data, e.compressed);

    std::string out;
    if (e.method == 0) {
      out.assign(raw);
    } else if (e.method == 8) {
      out.resize(e.size);
      z_stream zs{};
      if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) unreadable("inflate init");
      zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(raw.data()));
      zs.avail_in = static_cast<uInt>(raw.size());
      zs.next_out = reinterpret_cast<Bytef*>(out.data());
      zs.avail_out = static_cast<uInt>(out.size());
      int rc = inflate(&zs, Z_FINISH);
      auto produced = zs.total_out;
      inflateEnd(&zs);
      if (rc != Z_STREAM_END || produced != e.size) unreadable("corrupt deflate stream");
    } else {
      unreadable("unsupported compression method");
    }
    auto crc = crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size()));
    if (crc != e.crc) unreadable("checksum mismatch in " + name);
    return out;
  }

 private:
  struct Entry {
    std::uint16_t method = 0;
    std::uint32_t crc = 0;
    std::uint32_t compressed = 0;
    std::uint32_t size = 0;
    std::uint32_t local_offset = 0;
  };

  std::string_view bytes_;
  std::map<std::string, Entry> entries_;
};

// ---------------------------------------------------------------------------
// XML helpers

pt::ptree parse_xml(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    unreadable(std::string("malformed XML: ") + e.what());
  }
  return tree;
}

std::string_view local_name(std::string_view tag) {
  auto colon = tag.rfind(':');
  return colon == std::string_view::npos ? tag : tag.substr(colon + 1);
}

const pt::ptree* child(const pt::ptree& node, std::string_view name) {
  for (const auto& [tag, sub] : node) {
    if (local_name(tag) == name) return &sub;
  }
  return nullptr;
}

std::optional<std::string> attribute(const pt::ptree& node, std::string_view name) {
  if (auto attrs = node.get_child_optional("<xmlattr>")) {
    for (const auto& [key, value] : *attrs) {
      if (key == name || local_name(key) == name) return value.data();
    }
  }
  return std::nullopt;
}

// Concatenated text of <t> elements, directly or inside rich-text runs.
std::string rich_text(const pt::ptree& node) {
  std::string out;
  for (const auto& [tag, sub] : node) {
    auto name = local_name(tag);
    if (name == "t") {
      out += sub.data();
    } else if (name == "r") {
      if (auto t = child(sub, "t")) out += t->data();
    }
  }
  return out;
}

// "BC12" -> zero-based column 54.
std::optional<std::size_t> column_of(std::string_view ref) {
  std::size_t col = 0;
  std::size_t i = 0;
  while (i < ref.size() && ref[i] >= 'A' && ref[i] <= 'Z') {
    col = col * 26 + static_cast<std::size_t>(ref[i] - 'A' + 1);
    ++i;
  }
  if (i == 0 || col > 16384) return std::nullopt;
  return col - 1;
}

std::string resolve_first_sheet(const ZipReader& zip) {
  const std::string fallback = "xl/worksheets/sheet1.xml";
  if (!zip.has("xl/workbook.xml")) unreadable("missing workbook part");
  auto workbook = parse_xml(zip.read("xl/workbook.xml"));
  const pt::ptree* root = child(workbook, "workbook");
  const pt::ptree* sheets = root ? child(*root, "sheets") : nullptr;
  const pt::ptree* first = sheets ? child(*sheets, "sheet") : nullptr;
  if (!first) unreadable("workbook has no sheets");
  auto rel_id = attribute(*first, "id");
  if (!rel_id || !zip.has("xl/_rels/workbook.xml.rels")) return fallback;

  auto rels = parse_xml(zip.read("xl/_rels/workbook.xml.rels"));
  const pt::ptree* rel_root = child(rels, "Relationships");
  if (!rel_root) return fallback;
  for (const auto& [tag, rel] : *rel_root) {
    if (local_name(tag) != "Relationship" || attribute(rel, "Id") != rel_id) continue;
    auto target = attribute(rel, "Target").value_or("");
    if (target.starts_with("/")) return target.substr(1);
    return "xl/" + target;
  }
  return fallback;
}

// ---------------------------------------------------------------------------
// zip writer

void put16(std::string& out, std::uint32_t v) {
  out += static_cast<char>(v & 0xFF);
  out += static_cast<char>((v >> 8) & 0xFF);
}
void put32(std::string& out, std::uint32_t v) {
  put16(out, v & 0xFFFF);
  put16(out, v >> 16);
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

bool looks_numeric(std::string_view s) {
  if (s.empty() || s.size() > 15) return false;
  std::size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) return false;
  // Leading zeros ("001") are identifiers, not numbers.
  if (s[i] == '0' && i + 1 < s.size() && s[i + 1] != '.') return false;
  bool dot = false, digits = false;
  for (; i < s.size(); ++i) {
    if (s[i] == '.' && !dot) {
      dot = true;
    } else if (s[i] >= '0' && s[i] <= '9') {
      digits = true;
    } else {
      return false;
    }
  }
  return digits && s.back() != '.';
}

std::string column_letters(std::size_t col) {
  std::string out;
  for (++col; col > 0; col = (col - 1) / 26) out.insert(out.begin(), static_cast<char>('A' + (col - 1) % 26));
  return out;
}

}  // namespace

Table read_xlsx(std::string_view bytes) {
  ZipReader zip(bytes);

  std::vector<std::string> shared;
  if (zip.has("xl/sharedStrings.xml")) {
    auto sst = parse_xml(zip.read("xl/sharedStrings.xml"));
    if (const pt::ptree* root = child(sst, "sst")) {
      for (const auto& [tag, si] : *root) {
        if (local_name(tag) == "si") shared.push_back(rich_text(si));
      }
    }
  }

  auto sheet = parse_xml(zip.read(resolve_first_sheet(zip)));
  const pt::ptree* ws = child(sheet, "worksheet");
  const pt::ptree* data = ws ? child(*ws, "sheetData") : nullptr;
  if (!data) unreadable("worksheet has no sheetData");

  Table table;
  for (const auto& [tag, row_node] : *data) {
    if (local_name(tag) != "row") continue;
    std::size_t row_index = table.size();
    if (auto r = attribute(row_node, "r")) {
      try {
        row_index = std::stoul(*r) - 1;
      } catch (...) {
        unreadable("bad row reference");
      }
    }
    if (row_index < table.size() || row_index > 1'048'576) unreadable("rows out of order");
    table.resize(row_index + 1);
    Row& row = table.back();

    for (const auto& [ctag, cell] : row_node) {
      if (local_name(ctag) != "c") continue;
      std::size_t col = row.size();
      if (auto ref = attribute(cell, "r")) {
        auto parsed = column_of(*ref);
        if (!parsed) unreadable("bad cell reference");
        col = *parsed;
      }
      auto type = attribute(cell, "t").value_or("n");
      std::string value;
      const pt::ptree* v = child(cell, "v");
      if (type == "s") {
        if (!v) unreadable("shared string cell without index");
        std::size_t idx = 0;
        try {
          idx = std::stoul(v->data());
        } catch (...) {
          unreadable("bad shared string index");
        }
        if (idx >= shared.size()) unreadable("shared string index out of range");
        value = shared[idx];
      } else if (type == "inlineStr") {
        if (const pt::ptree* is = child(cell, "is")) value = rich_text(*is);
      } else if (type == "b") {
        value = v && v->data() == "1" ? "TRUE" : "FALSE";
      } else if (v) {
        value = v->data();
      }
      if (col >= row.size()) row.resize(col + 1);
      row[col] = std::move(value);
    }
  }
  return table;
}

std::string write_xlsx(const Table& table, std::string_view sheet_name) {
  std::string sheet =
      R"(<?xml version="1.0" encoding="UTF-8" standalone="yes"?>)"
      R"(<worksheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main"><sheetData>)";
  for (std::size_t r = 0; r < table.size(); ++r) {
    auto rn = std::to_string(r + 1);
    sheet += "<row r=\"" + rn + "\">";
    for (std::size_t c = 0; c < table[r].size(); ++c) {
      const auto& cell = table[r][c];
      if (cell.empty()) continue;
      auto ref = column_letters(c) + rn;
      if (looks_numeric(cell)) {
        sheet += "<c r=\"" + ref + "\"><v>" + cell + "</v></c>";
      } else {
        sheet += "<c r=\"" + ref + "\" t=\"inlineStr\"><is><t xml:space=\"preserve\">" +
                 xml_escape(cell) + "</t></is></c>";
      }
    }
    sheet += "</row>";
  }
  sheet += "</sheetData></worksheet>";

  const std::pair<std::string, std::string> parts[] = {
      {"[Content_Types].xml",
       R"(<?xml version="1.0" encoding="UTF-8" standalone="yes"?>)"
       R"(<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">)"
       R"(<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>)"
       R"(<Default Extension="xml" ContentType="application/xml"/>)"
       R"(<Override PartName="/xl/workbook.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>)"
       R"(<Override PartName="/xl/worksheets/sheet1.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/>)"
       R"(</Types>)"},
      {"_rels/.rels",
       R"(<?xml version="1.0" encoding="UTF-8" standalone="yes"?>)"
       R"(<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">)"
       R"(<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" Target="xl/workbook.xml"/>)"
       R"(</Relationships>)"},
      {"xl/workbook.xml",
       std::string(R"(<?xml version="1.0" encoding="UTF-8" standalone="yes"?>)"
                   R"(<workbook xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main" )"
                   R"(xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships">)"
                   R"(<sheets><sheet name=")") +
           xml_escape(sheet_name) + R"(" sheetId="1" r:id="rId1"/></sheets></workbook>)"},
      {"xl/_rels/workbook.xml.rels",
       R"(<?xml version="1.0" encoding="UTF-8" standalone="yes"?>)"
       R"(<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">)"
       R"(<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet" Target="worksheets/sheet1.xml"/>)"
       R"(</Relationships>)"},
      {"xl/worksheets/sheet1.xml", sheet},
  };

  constexpr std::uint32_t kDosDate = (0u << 9) | (1u << 5) | 1u;  // 1980-01-01
  std::string out, central;
  for (const auto& [name, body] : parts) {
    auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
    auto offset = static_cast<std::uint32_t>(out.size());
    auto size = static_cast<std::uint32_t>(body.size());

    put32(out, 0x04034b50);
    put16(out, 20);
    put16(out, 0);
    put16(out, 0);
    put16(out, 0);
    put16(out, kDosDate);
    put32(out, crc);
    put32(out, size);
    put32(out, size);
    put16(out, static_cast<std::uint32_t>(name.size()));
    put16(out, 0);
    out += name;
    out += body;

    put32(central, 0x02014b50);
    put16(central, 20);
    put16(central, 20);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, kDosDate);
    put32(central, crc);
    put32(central, size);
    put32(central, size);
    put16(central, static_cast<std::uint32_t>(name.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0);
    put32(central, offset);
    central += name;
  }
  auto cd_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  put32(out, 0x06054b50);
  put16(out, 0);
  put16(out, 0);
  put16(out, std::size(parts));
  put16(out, std::size(parts));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, cd_offset);
  put16(out, 0);
  return out;
}

}  // namespace facdash::ingest
