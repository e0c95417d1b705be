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

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tutoreval {

enum class SpeakerRole { Tutor, Student, Other };

/// Who said a turn. Labels that spell "tutor" or "student" (any case) always
/// normalize to the corresponding role, so rendering and parsing agree.
class Speaker {
 public:
  static Speaker tutor() { return Speaker(SpeakerRole::Tutor, "Tutor"); }
  static Speaker student() { return Speaker(SpeakerRole::Student, "Student"); }
  static Speaker from_label(std::string_view label);

  SpeakerRole role() const { return role_; }
  const std::string& label() const { return label_; }

  friend bool operator==(const Speaker&, const Speaker&) = default;

 private:
  Speaker(SpeakerRole role, std::string label) : role_(role), label_(std::move(label)) {}
  SpeakerRole role_;
  std::string label_;
};

struct Turn {
  std::size_t index = 0;
  Speaker speaker = Speaker::tutor();
  std::string text;
  std::optional<double> timestamp;  // seconds from session start

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Transcript {
  std::string session_id;
  std::vector<Turn> turns;
  std::map<std::string, std::string> metadata;

  /// Throws Error(InvalidTranscript | NoTutorTurns) when an invariant is broken.
  void validate() const;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

struct Chunk {
  std::string chunk_id;
  std::string transcript_id;
  std::size_t first_turn = 0;  // inclusive
  std::size_t last_turn = 0;   // inclusive
  std::string text;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

enum class TranscriptFormat { PlainDialogue, JsonLines };

struct ChunkParams {
  std::size_t window = 10;
  std::size_t overlap = 2;
};

/// Parses a raw transcript. Blank lines are skipped; every other line becomes
/// exactly one turn or a MalformedLine error.
Transcript parse_transcript(std::string_view raw, TranscriptFormat format,
                            std::string session_id = "transcript");

/// "<Speaker>: <text>" per turn, joined with '\n', no trailing newline.
/// Embedded newlines in a turn are flattened to spaces and ": " inside an
/// Other label is escaped as "\: ".
std::string render_dialogue(const Transcript& transcript);

/// Renders turns [first, last] only.
std::string render_turns(const Transcript& transcript, std::size_t first, std::size_t last);

std::vector<Chunk> chunk_turns(const Transcript& transcript, std::size_t window, std::size_t overlap);
inline std::vector<Chunk> chunk_turns(const Transcript& transcript, ChunkParams params = {}) {
  return chunk_turns(transcript, params.window, params.overlap);
}

/// Lossless JSON document used for ingested transcript artifacts.
std::string transcript_to_json(const Transcript& transcript);
Transcript transcript_from_json(std::string_view json);

/// Picks a format from a file extension: ".jsonl" is JsonLines, anything else PlainDialogue.
TranscriptFormat format_for_path(std::string_view path);

}  // namespace tutoreval
