#pragma once

// classes.dexl / AndroidManifest.xml stand-in formats. DexLite is a flat,
// line-oriented bytecode sketch: named methods holding ordered CALL and
// STRINGCONST statements. The manifest is a severely restricted XML subset.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "spoofbench/errors.hpp"
#include "spoofbench/util.hpp"

namespace spoofbench {

enum class Guard : std::uint8_t { kUnguarded, kGuarded };

struct DexStatement {
  enum class Kind : std::uint8_t { kCall, kStringConst } kind;
  Guard guard{Guard::kUnguarded};  // calls only
  std::string text;                // callee path or string literal

  static DexStatement call(Guard g, std::string callee) {
    return {Kind::kCall, g, std::move(callee)};
  }
  static DexStatement str(std::string literal) {
    return {Kind::kStringConst, Guard::kUnguarded, std::move(literal)};
  }
  bool operator==(const DexStatement&) const = default;
};

struct DexMethod {
  std::string name;
  std::vector<DexStatement> statements;
  bool operator==(const DexMethod&) const = default;
};

struct DexLiteProgram {
  std::vector<DexMethod> methods;
  bool operator==(const DexLiteProgram&) const = default;

  const DexMethod* find(std::string_view name) const {
    for (const auto& m : methods)
      if (m.name == name) return &m;
    return nullptr;
  }
};

inline bool is_internal_callee(std::string_view callee) {
  return callee.rfind("self.", 0) == 0;
}

inline bool is_external_callee(std::string_view callee) {
  if (is_internal_callee(callee)) return false;
  std::size_t dots = 0;
  for (char c : callee)
    if (c == '.') ++dots;
  return dots >= 1 && callee.front() != '.' && callee.back() != '.';
}

namespace detail {

inline void validate_dex(const DexLiteProgram& p) {
  std::set<std::string> names;
  for (const auto& m : p.methods) {
    if (m.name.empty()) throw InvariantError("empty method name");
    if (!names.insert(m.name).second)
      throw InvariantError("duplicate method name: " + m.name);
    for (const auto& s : m.statements) {
      if (s.kind == DexStatement::Kind::kCall && !is_internal_callee(s.text) &&
          !is_external_callee(s.text))
        throw InvariantError("callee neither external dotted path nor self.<method>: " +
                             s.text);
      if (s.text.find('\n') != std::string::npos)
        throw InvariantError("newline inside statement text");
    }
  }
}

}  // namespace detail

inline std::string write_dexlite(const DexLiteProgram& p) {
  detail::validate_dex(p);
  std::string out = "DEXL1\n";
  for (const auto& m : p.methods) {
    out += "M " + m.name + "\n";
    for (const auto& s : m.statements) {
      if (s.kind == DexStatement::Kind::kCall)
        out += std::string("C ") + (s.guard == Guard::kGuarded ? "g " : "u ") + s.text + "\n";
      else
        out += "S " + s.text + "\n";
    }
  }
  return out;
}

inline DexLiteProgram parse_dexlite(std::string_view text) {
  DexLiteProgram p;
  std::size_t line_no = 0;
  bool saw_magic = false;
  for (const auto& line : split_on(text, '\n')) {
    ++line_no;
    if (line.empty()) {
      if (line_no > 1) continue;  // trailing blank from final LF
      throw ParseError("line 1: missing DEXL1 magic");
    }
    if (!saw_magic) {
      if (line != "DEXL1") throw ParseError("line 1: missing DEXL1 magic");
      saw_magic = true;
      continue;
    }
    if (line.rfind("M ", 0) == 0) {
      p.methods.push_back({line.substr(2), {}});
    } else if (line.rfind("C g ", 0) == 0 || line.rfind("C u ", 0) == 0) {
      if (p.methods.empty())
        throw ParseError("line " + std::to_string(line_no) + ": statement before method");
      p.methods.back().statements.push_back(DexStatement::call(
          line[2] == 'g' ? Guard::kGuarded : Guard::kUnguarded, line.substr(4)));
    } else if (line.rfind("S ", 0) == 0) {
      if (p.methods.empty())
        throw ParseError("line " + std::to_string(line_no) + ": statement before method");
      p.methods.back().statements.push_back(DexStatement::str(line.substr(2)));
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": unrecognized record");
    }
  }
  if (!saw_magic) throw ParseError("line 1: missing DEXL1 magic");
  detail::validate_dex(p);
  return p;
}

struct ManifestInfo {
  std::string package;
  std::set<std::string> permissions;
  std::set<std::pair<std::string, std::string>> components;  // (kind, name)
  bool operator==(const ManifestInfo&) const = default;
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
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

inline std::string xml_unescape(std::string_view s, std::size_t line_no) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    auto rest = s.substr(i);
    if (rest.rfind("&amp;", 0) == 0) out += '&', i += 4;
    else if (rest.rfind("&lt;", 0) == 0) out += '<', i += 3;
    else if (rest.rfind("&gt;", 0) == 0) out += '>', i += 3;
    else if (rest.rfind("&quot;", 0) == 0) out += '"', i += 5;
    else
      throw ParseError("line " + std::to_string(line_no) + ": unknown entity");
  }
  return out;
}

}  // namespace detail

inline std::string write_manifest(const ManifestInfo& m) {
  std::string out = "<manifest package=\"" + detail::xml_escape(m.package) + "\">\n";
  for (const auto& p : m.permissions)
    out += "<uses-permission name=\"" + detail::xml_escape(p) + "\"/>\n";
  for (const auto& [kind, name] : m.components)
    out += "<component type=\"" + detail::xml_escape(kind) + "\" name=\"" +
           detail::xml_escape(name) + "\"/>\n";
  out += "</manifest>\n";
  return out;
}

inline ManifestInfo parse_manifest(std::string_view text) {
  ManifestInfo m;
  std::size_t line_no = 0;
  bool open = false, closed = false;
  auto attr = [&](std::string_view line, std::string_view key) {
    std::string pat = std::string(key) + "=\"";
    auto at = line.find(pat);
    if (at == std::string_view::npos)
      throw ParseError("line " + std::to_string(line_no) + ": missing attribute " +
                       std::string(key));
    auto end = line.find('"', at + pat.size());
    if (end == std::string_view::npos)
      throw ParseError("line " + std::to_string(line_no) + ": unterminated attribute");
    return detail::xml_unescape(line.substr(at + pat.size(), end - at - pat.size()),
                                line_no);
  };
  for (const auto& raw : split_on(text, '\n')) {
    ++line_no;
    std::string line = raw;
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t'))
      line.erase(line.begin());
    if (line.empty()) continue;
    if (closed)
      throw ParseError("line " + std::to_string(line_no) + ": content after </manifest>");
    if (!open) {
      if (line.rfind("<manifest ", 0) != 0 || line.back() != '>')
        throw ParseError("line " + std::to_string(line_no) + ": expected <manifest>");
      m.package = attr(line, "package");
      open = true;
    } else if (line == "</manifest>") {
      closed = true;
    } else if (line.rfind("<uses-permission ", 0) == 0) {
      m.permissions.insert(attr(line, "name"));
    } else if (line.rfind("<component ", 0) == 0) {
      m.components.emplace(attr(line, "type"), attr(line, "name"));
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": unrecognized element");
    }
  }
  if (!closed) throw ParseError("line " + std::to_string(line_no) + ": missing </manifest>");
  return m;
}

}  // namespace spoofbench
