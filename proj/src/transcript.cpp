// Copyright 2026 the tutoreval authors
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

#include "tutoreval/transcript.hpp"

#include <cmath>

#include "json.hpp"
#include "tutoreval/error.hpp"
#include "util.hpp"

namespace tutoreval {

using nlohmann::json;

Speaker Speaker::from_label(std::string_view label) {
  const auto trimmed = detail::trim(label);
  if (trimmed.empty()) throw Error(ErrorCode::InvalidTranscript, "empty speaker label");
  if (detail::iequals(trimmed, "tutor")) return tutor();
  if (detail::iequals(trimmed, "student")) return student();
  return Speaker(SpeakerRole::Other, std::string(trimmed));
}

void Transcript::validate() const {
  if (session_id.empty()) throw Error(ErrorCode::InvalidTranscript, "empty session_id");
  if (turns.empty()) throw Error(ErrorCode::InvalidTranscript, "transcript has no turns");
  bool has_tutor = false;
  std::optional<double> last_ts;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Turn& t = turns[i];
    if (t.index != i) {
      throw Error(ErrorCode::InvalidTranscript, "turn indices must be consecutive from 0 (turn " +
                                                    std::to_string(i) + " has index " +
                                                    std::to_string(t.index) + ")");
    }
    if (detail::trim(t.text).empty()) {
      throw Error(ErrorCode::InvalidTranscript, "turn " + std::to_string(i) + " has empty text");
    }
    if (t.timestamp) {
      if (!std::isfinite(*t.timestamp) || *t.timestamp < 0) {
        throw Error(ErrorCode::InvalidTranscript, "turn " + std::to_string(i) + " has an invalid timestamp");
      }
      if (last_ts && *t.timestamp < *last_ts) {
        throw Error(ErrorCode::InvalidTranscript, "timestamps decrease at turn " + std::to_string(i));
      }
      last_ts = t.timestamp;
    }
    has_tutor = has_tutor || t.speaker.role() == SpeakerRole::Tutor;
  }
  if (!has_tutor) throw Error(ErrorCode::NoTutorTurns, "transcript '" + session_id + "' has no tutor turns");
}

namespace {

// Position of the first ": " whose colon is not escaped with a backslash.
std::size_t find_separator(std::string_view line) {
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    if (line[i] == ':' && line[i + 1] == ' ' && (i == 0 || line[i - 1] != '\\')) return i;
  }
  return std::string_view::npos;
}

std::string unescape_label(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (label[i] == '\\' && i + 1 < label.size() && label[i + 1] == ':') continue;
    out += label[i];
  }
  return out;
}

std::string escape_label(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (label[i] == ':' && i + 1 < label.size() && label[i + 1] == ' ') out += '\\';
    out += label[i];
  }
  return out;
}

Turn parse_plain_line(std::string_view line, std::size_t line_no, std::size_t index) {
  const auto sep = find_separator(line);
  if (sep == std::string_view::npos) {
    throw Error(ErrorCode::MalformedLine, line_no, "expected '<speaker>: <text>'");
  }
  const auto label = detail::trim(line.substr(0, sep));
  const auto text = detail::trim(line.substr(sep + 2));
  if (label.empty()) throw Error(ErrorCode::MalformedLine, line_no, "empty speaker label");
  if (text.empty()) throw Error(ErrorCode::MalformedLine, line_no, "empty utterance");
  return Turn{index, Speaker::from_label(unescape_label(label)), std::string(text), std::nullopt};
}

Turn parse_json_line(std::string_view line, std::size_t line_no, std::size_t index) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedLine, line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw Error(ErrorCode::MalformedLine, line_no, "expected a JSON object");
  const auto speaker = obj.find("speaker");
  if (speaker == obj.end() || !speaker->is_string()) {
    throw Error(ErrorCode::MalformedLine, line_no, "missing string field 'speaker'");
  }
  const auto text = obj.find("text");
  if (text == obj.end() || !text->is_string()) {
    throw Error(ErrorCode::MalformedLine, line_no, "missing string field 'text'");
  }
  if (detail::trim(speaker->get<std::string>()).empty()) {
    throw Error(ErrorCode::MalformedLine, line_no, "empty speaker label");
  }
  const std::string body(detail::trim(text->get<std::string>()));
  if (body.empty()) throw Error(ErrorCode::MalformedLine, line_no, "empty utterance");

  Turn turn{index, Speaker::from_label(speaker->get<std::string>()), body, std::nullopt};
  if (const auto ts = obj.find("timestamp"); ts != obj.end() && !ts->is_null()) {
    if (!ts->is_number()) throw Error(ErrorCode::MalformedLine, line_no, "'timestamp' must be a number");
    const double v = ts->get<double>();
    if (!std::isfinite(v) || v < 0) {
      throw Error(ErrorCode::MalformedLine, line_no, "'timestamp' must be a non-negative number");
    }
    turn.timestamp = v;
  }
  return turn;
}

std::string flatten(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

}  // namespace

Transcript parse_transcript(std::string_view raw, TranscriptFormat format, std::string session_id) {
  if (detail::trim(raw).empty()) throw Error(ErrorCode::EmptyInput, "transcript input is empty");

  Transcript t;
  t.session_id = std::move(session_id);
  const auto lines = detail::split_lines(raw);
  std::optional<double> last_ts;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (detail::trim(line).empty()) continue;
    const std::size_t line_no = i + 1;
    Turn turn = format == TranscriptFormat::PlainDialogue ? parse_plain_line(line, line_no, t.turns.size())
                                                          : parse_json_line(line, line_no, t.turns.size());
    if (turn.timestamp) {
      if (last_ts && *turn.timestamp < *last_ts) {
        throw Error(ErrorCode::MalformedLine, line_no, "timestamp earlier than the previous turn");
      }
      last_ts = turn.timestamp;
    }
    t.turns.push_back(std::move(turn));
  }
  t.validate();
  return t;
}

std::string render_turns(const Transcript& transcript, std::size_t first, std::size_t last) {
  std::string out;
  for (std::size_t i = first; i <= last && i < transcript.turns.size(); ++i) {
    const Turn& turn = transcript.turns[i];
    if (i != first) out += '\n';
    out += escape_label(turn.speaker.label());
    out += ": ";
    out += flatten(turn.text);
  }
  return out;
}

std::string render_dialogue(const Transcript& transcript) {
  if (transcript.turns.empty()) return {};
  return render_turns(transcript, 0, transcript.turns.size() - 1);
}

std::vector<Chunk> chunk_turns(const Transcript& transcript, std::size_t window, std::size_t overlap) {
  if (window == 0) throw Error(ErrorCode::InvalidChunkParams, "window must be positive");
  if (overlap >= window) {
    throw Error(ErrorCode::InvalidChunkParams,
                "overlap (" + std::to_string(overlap) + ") must be smaller than window (" + std::to_string(window) + ")");
  }
  std::vector<Chunk> chunks;
  if (transcript.turns.empty()) return chunks;
  const std::size_t last = transcript.turns.size() - 1;
  const std::size_t stride = window - overlap;
  for (std::size_t start = 0;; start += stride) {
    const std::size_t end = std::min(start + window - 1, last);
    chunks.push_back(Chunk{transcript.session_id + "#chunk-" + std::to_string(chunks.size()), transcript.session_id,
                           start, end, render_turns(transcript, start, end)});
    if (end == last) break;
  }
  return chunks;
}

std::string transcript_to_json(const Transcript& transcript) {
  json turns = json::array();
  for (const Turn& t : transcript.turns) {
    json jt = {{"index", t.index}, {"speaker", t.speaker.label()}, {"text", t.text}};
    if (t.timestamp) jt["timestamp"] = *t.timestamp;
    turns.push_back(std::move(jt));
  }
  json doc = {{"session_id", transcript.session_id}, {"metadata", transcript.metadata}, {"turns", std::move(turns)}};
  return doc.dump(2) + "\n";
}

Transcript transcript_from_json(std::string_view text) {
  Transcript t;
  try {
    const json doc = json::parse(text);
    t.session_id = doc.at("session_id").get<std::string>();
    if (doc.contains("metadata")) t.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();
    for (const auto& jt : doc.at("turns")) {
      Turn turn{jt.at("index").get<std::size_t>(), Speaker::from_label(jt.at("speaker").get<std::string>()),
                jt.at("text").get<std::string>(), std::nullopt};
      if (jt.contains("timestamp") && !jt.at("timestamp").is_null()) turn.timestamp = jt.at("timestamp").get<double>();
      t.turns.push_back(std::move(turn));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("transcript document: ") + e.what());
  }
  t.validate();
  return t;
}

TranscriptFormat format_for_path(std::string_view path) {
  const auto lower = detail::to_lower(path);
  if (lower.size() >= 6 && lower.compare(lower.size() - 6, 6, ".jsonl") == 0) return TranscriptFormat::JsonLines;
  return TranscriptFormat::PlainDialogue;
}

}  // namespace tutoreval
