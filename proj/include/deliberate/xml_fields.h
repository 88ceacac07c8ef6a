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

#ifndef DELIBERATE_XML_FIELDS_H_
#define DELIBERATE_XML_FIELDS_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace deliberate {

// A tag that may occur many times. With no `fields` the tag is flat and each
// occurrence's text is stored under the tag's own name; otherwise each
// occurrence is a container whose listed sub-tags are extracted.
struct RepeatedTag {
  std::string tag;
  std::vector<std::string> fields;
  std::vector<std::string> required_fields;
  size_t min_count = 0;
};

struct TagSchema {
  std::vector<std::string> required;
  std::vector<std::string> optional;
  std::vector<RepeatedTag> repeated;
};

using FieldRecord = std::map<std::string, std::string>;

struct ParsedFields {
  std::map<std::string, std::string> values;
  std::map<std::string, std::vector<FieldRecord>> lists;

  bool operator==(const ParsedFields&) const = default;
};

// Tag-scanning extraction of model output. Tolerates a missing root wrapper,
// prose between tags, XML comments, unescaped ampersands and mismatched
// closing tags on leaf values (a leaf ends at the first "</"). Values are
// trimmed and the five predefined entities are decoded.
// Throws kParse naming the first missing required tag; the error carries the
// raw text.
ParsedFields ParseXmlFields(std::string_view text, const TagSchema& schema);

// Canonical rendering of parsed fields; ParseXmlFields inverts it for values
// without surrounding whitespace.
std::string RenderXmlFields(const ParsedFields& fields, const TagSchema& schema);

std::string EscapeXmlText(std::string_view text);

}  // namespace deliberate

#endif  // DELIBERATE_XML_FIELDS_H_
