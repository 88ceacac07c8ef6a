// Copyright 2026 The Deliberate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "deliberate/xml_fields.h"

#include <cctype>
#include <optional>

#include "deliberate/error.h"

namespace deliberate {
namespace {

struct Span {
  size_t begin;
  size_t end;
};

std::string StripComments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  size_t pos = 0;
  while (pos < text.size()) {
    const size_t open = text.find("<!--", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    const size_t close = text.find("-->", open + 4);
    if (close == std::string_view::npos) break;
    pos = close + 3;
  }
  return out;
}

std::string Trim(std::string_view s) {
  const size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string DecodeEntities(std::string_view s) {
  static constexpr std::pair<std::string_view, char> kEntities[] = {
      {"&lt;", '<'}, {"&gt;", '>'}, {"&amp;", '&'}, {"&quot;", '"'}, {"&apos;", '\''}};
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size();) {
    bool matched = false;
    if (s[i] == '&') {
      for (const auto& [entity, ch] : kEntities) {
        if (s.substr(i, entity.size()) == entity) {
          out.push_back(ch);
          i += entity.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(s[i++]);
  }
  return out;
}

std::string OpenTag(std::string_view tag) { return "<" + std::string(tag) + ">"; }
std::string CloseTag(std::string_view tag) { return "</" + std::string(tag) + ">"; }

// Leaf value starting after the open tag at `open`; ends at the first "</".
std::optional<std::string> LeafAt(std::string_view text, size_t open,
                                  std::string_view tag, size_t limit) {
  const size_t start = open + tag.size() + 2;
  size_t end = start;
  // An unclosed leaf runs until the next opening or closing tag.
  while ((end = text.find('<', end)) != std::string_view::npos && end < limit) {
    if (end + 1 < text.size() &&
        (text[end + 1] == '/' || std::isalpha(static_cast<unsigned char>(text[end + 1])))) {
      break;
    }
    ++end;
  }
  if (end == std::string_view::npos || end > limit) end = limit;
  return DecodeEntities(Trim(text.substr(start, end - start)));
}

// Single-valued top-level tag: exact close when present, else first "</".
std::optional<std::string> FindSingle(std::string_view text, std::string_view tag) {
  const size_t open = text.find(OpenTag(tag));
  if (open == std::string_view::npos) return std::nullopt;
  const size_t start = open + tag.size() + 2;
  const size_t exact = text.find(CloseTag(tag), start);
  if (exact != std::string_view::npos) {
    return DecodeEntities(Trim(text.substr(start, exact - start)));
  }
  return LeafAt(text, open, tag, text.size());
}

std::vector<Span> ContainerSpans(std::string_view text, std::string_view tag) {
  std::vector<Span> spans;
  const std::string open_tag = OpenTag(tag);
  const std::string close_tag = CloseTag(tag);
  size_t pos = 0;
  while (true) {
    const size_t open = text.find(open_tag, pos);
    if (open == std::string_view::npos) break;
    const size_t start = open + open_tag.size();
    const size_t next_open = text.find(open_tag, start);
    size_t end = text.find(close_tag, start);
    if (end == std::string_view::npos || (next_open != std::string_view::npos &&
                                          next_open < end)) {
      end = next_open == std::string_view::npos ? text.size() : next_open;
      pos = end;
    } else {
      pos = end + close_tag.size();
    }
    spans.push_back({start, end});
  }
  return spans;
}

[[noreturn]] void ThrowMissing(std::string_view what, std::string_view raw) {
  throw Error(ErrorCode::kParse, "model response is missing <" + std::string(what) + ">")
      .set_raw_text(std::string(raw));
}

}  // namespace

std::string EscapeXmlText(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

ParsedFields ParseXmlFields(std::string_view raw, const TagSchema& schema) {
  const std::string text = StripComments(raw);
  ParsedFields out;
  for (const std::string& tag : schema.required) {
    auto value = FindSingle(text, tag);
    if (!value) ThrowMissing(tag, raw);
    out.values[tag] = std::move(*value);
  }
  for (const std::string& tag : schema.optional) {
    if (auto value = FindSingle(text, tag)) out.values[tag] = std::move(*value);
  }
  for (const RepeatedTag& rep : schema.repeated) {
    std::vector<FieldRecord>& records = out.lists[rep.tag];
    if (rep.fields.empty()) {
      const std::string open_tag = OpenTag(rep.tag);
      size_t pos = 0;
      while ((pos = text.find(open_tag, pos)) != std::string::npos) {
        records.push_back({{rep.tag, *LeafAt(text, pos, rep.tag, text.size())}});
        pos += open_tag.size();
      }
    } else {
      for (const Span& span : ContainerSpans(text, rep.tag)) {
        const std::string_view body =
            std::string_view(text).substr(0, span.end);
        FieldRecord record;
        for (const std::string& field : rep.fields) {
          const size_t open = body.find(OpenTag(field), span.begin);
          if (open == std::string_view::npos) continue;
          record[field] = *LeafAt(body, open, field, span.end);
        }
        for (const std::string& field : rep.required_fields) {
          if (!record.contains(field)) {
            ThrowMissing(rep.tag + "/" + field, raw);
          }
        }
        records.push_back(std::move(record));
      }
    }
    if (records.size() < rep.min_count) ThrowMissing(rep.tag, raw);
  }
  return out;
}

std::string RenderXmlFields(const ParsedFields& fields, const TagSchema& schema) {
  std::string out;
  const auto emit_single = [&](const std::string& tag) {
    const auto it = fields.values.find(tag);
    if (it == fields.values.end()) return;
    out += OpenTag(tag) + EscapeXmlText(it->second) + CloseTag(tag) + "\n";
  };
  for (const std::string& tag : schema.required) emit_single(tag);
  for (const std::string& tag : schema.optional) emit_single(tag);
  for (const RepeatedTag& rep : schema.repeated) {
    const auto it = fields.lists.find(rep.tag);
    if (it == fields.lists.end()) continue;
    for (const FieldRecord& record : it->second) {
      if (rep.fields.empty()) {
        const auto value = record.find(rep.tag);
        out += OpenTag(rep.tag) +
               EscapeXmlText(value == record.end() ? "" : value->second) +
               CloseTag(rep.tag) + "\n";
        continue;
      }
      out += OpenTag(rep.tag) + "\n";
      for (const std::string& field : rep.fields) {
        const auto value = record.find(field);
        if (value == record.end()) continue;
        out += "  " + OpenTag(field) + EscapeXmlText(value->second) +
               CloseTag(field) + "\n";
      }
      out += CloseTag(rep.tag) + "\n";
    }
  }
  return out;
}

}  // namespace deliberate
