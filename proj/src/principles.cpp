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

#include "tutoreval/principles.hpp"

#include <cctype>
#include <set>

#include "json.hpp"
#include "tutoreval/error.hpp"
#include "util.hpp"

namespace tutoreval {

using nlohmann::json;

namespace {

Principle make_principle(std::string name, std::string description, std::vector<std::string> criteria) {
  Principle p;
  p.principle_id = slugify(name);
  p.name = std::move(name);
  p.description = std::move(description);
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    p.criteria.push_back(Criterion{"c" + std::to_string(i + 1), std::move(criteria[i])});
  }
  return p;
}

std::string default_criterion_id(std::size_t i) { return "c" + std::to_string(i + 1); }

}  // namespace

std::string slugify(std::string_view name) {
  std::string out;
  bool dash = false;
  for (unsigned char c : name) {
    if (std::isalnum(c)) {
      if (dash && !out.empty()) out += '-';
      out += static_cast<char>(std::tolower(c));
      dash = false;
    } else {
      dash = true;
    }
  }
  return out;
}

Rubric default_rubric() {
  Rubric r;
  r.rubric_id = "sel-default-v1";

  Principle praise = make_principle(
      "Giving Effective Praise",
      "Praising students for putting forth effort by giving process-focused praise instead of praising students for "
      "getting an answer correct or getting a good grade",
      {"Praises the student's effort rather than their ability or intelligence",
       "Praise is specific to the process or strategy the student used",
       "Avoids praising only correct answers, grades, or outcomes",
       "Praise is sincere and tied to something the student actually did",
       "Uses praise to encourage the student to keep working through the problem"});
  praise.desired_example =
      "You are almost there! I am proud of how you are persevering through and striving to solve the problem. Keep "
      "going!";
  praise.undesired_example = "You are so smart and almost got the problem correct.";
  r.principles.push_back(std::move(praise));

  r.principles.push_back(make_principle(
      "Supporting a Growth Mindset",
      "Supporting a growth mindset instead of a fixed mindset by encouraging students on the learning process and not "
      "necessarily just getting the answer",
      {"Frames ability as something that grows with effort and practice",
       "Encourages the learning process rather than only the final answer",
       "Treats challenges and mistakes as opportunities to learn",
       "Avoids fixed-mindset language such as labeling the student as smart or not a math person",
       "Encourages persistence and trying new strategies when the student is stuck"}));

  r.principles.push_back(make_principle(
      "Reacting to Errors",
      "Responding to students when students make errors or mistakes, by not directly calling attention to the error "
      "but guiding students to realize and correct the error themselves.",
      {"Does not directly point out or announce the student's error",
       "Asks guiding questions that help the student find the error",
       "Gives the student the opportunity to correct the error themselves",
       "Responds to the error in a calm, non-judgmental way",
       "Acknowledges the student's corrected work once the error is fixed"}));

  r.principles.push_back(make_principle(
      "Responding to Negative Self-Talk",
      "Responding to students positively when students engage in negative self-talk, such as saying \"I can't do "
      "this\" or \"this is too hard for me\" by validating a student's feelings but encouraging and building their "
      "self-efficacy",
      {"Notices when the student engages in negative self-talk",
       "Validates the student's feelings without dismissing them",
       "Responds positively rather than ignoring or agreeing with the negative statement",
       "Reminds the student of past successes or progress to build self-efficacy",
       "Encourages the student to keep trying with a concrete next step"}));

  r.principles.push_back(make_principle(
      "Using Motivational Strategies",
      "Rewarding students by using intrinsic and extrinsic motivation strategies, such as rewarding students for "
      "working hard by giving them time at the end of a session to discuss their interests",
      {"Uses intrinsic motivation such as connecting the work to the student's interests or goals",
       "Uses extrinsic motivation such as rewards for effort or hard work",
       "Ties rewards to effort and engagement rather than only correct answers",
       "Shows interest in the student as a person, for example discussing their interests",
       "Keeps the student engaged and willing to continue the session"}));
  return r;
}

const Principle* Rubric::find(std::string_view principle_id) const {
  for (const auto& p : principles) {
    if (p.principle_id == principle_id) return &p;
  }
  return nullptr;
}

void Rubric::validate() const {
  auto fail = [](const std::string& why) { return Error(ErrorCode::ValidationError, why); };
  if (rubric_id.empty()) throw fail("rubric_id is empty");
  if (principles.empty()) throw fail("rubric has no principles");
  std::set<std::string> names;
  std::set<std::string> ids;
  for (const auto& p : principles) {
    if (p.name.empty()) throw fail("principle with empty name");
    if (p.principle_id.empty()) throw fail("principle '" + p.name + "' has an empty principle_id");
    if (!names.insert(p.name).second) throw fail("duplicate principle name '" + p.name + "'");
    if (!ids.insert(p.principle_id).second) throw fail("duplicate principle_id '" + p.principle_id + "'");
    if (p.criteria.empty()) throw fail("principle '" + p.name + "' has no criteria");
    if (p.criteria.size() > kMaxCriteria) {
      throw fail("principle '" + p.name + "' has more than " + std::to_string(kMaxCriteria) + " criteria");
    }
    if (scale == RubricScale::ZeroToFive && p.criteria.size() != kFivePointCriteria) {
      throw fail("principle '" + p.name + "' has " + std::to_string(p.criteria.size()) +
                 " criteria but the 0-5 scale needs exactly 5");
    }
    std::set<std::string> crit_ids;
    for (const auto& c : p.criteria) {
      if (detail::trim(c.text).empty()) throw fail("principle '" + p.name + "' has an empty criterion");
      if (c.criterion_id.empty()) throw fail("principle '" + p.name + "' has a criterion with empty id");
      if (!crit_ids.insert(c.criterion_id).second) {
        throw fail("duplicate criterion_id '" + c.criterion_id + "' in principle '" + p.name + "'");
      }
    }
  }
}

std::string render_criteria(const Principle& principle) {
  std::string out;
  for (std::size_t i = 0; i < principle.criteria.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + principle.criteria[i].text;
  }
  return out;
}

std::string rubric_to_json(const Rubric& rubric) {
  json principles = json::array();
  for (const auto& p : rubric.principles) {
    json criteria = json::array();
    for (std::size_t i = 0; i < p.criteria.size(); ++i) {
      const auto& c = p.criteria[i];
      if (c.criterion_id == default_criterion_id(i)) {
        criteria.push_back(c.text);
      } else {
        criteria.push_back({{"id", c.criterion_id}, {"text", c.text}});
      }
    }
    json jp = {{"principle_id", p.principle_id},
               {"name", p.name},
               {"description", p.description},
               {"criteria", std::move(criteria)}};
    if (p.desired_example) jp["desired_example"] = *p.desired_example;
    if (p.undesired_example) jp["undesired_example"] = *p.undesired_example;
    principles.push_back(std::move(jp));
  }
  json doc = {{"rubric_id", rubric.rubric_id},
              {"scale", rubric.scale == RubricScale::ZeroToFive ? "0-5" : "unconstrained"},
              {"principles", std::move(principles)}};
  return doc.dump(2) + "\n";
}

Rubric parse_rubric(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "rubric at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  Rubric r;
  try {
    r.rubric_id = doc.at("rubric_id").get<std::string>();
    if (doc.contains("scale")) {
      const auto scale = doc.at("scale").get<std::string>();
      if (scale == "0-5") {
        r.scale = RubricScale::ZeroToFive;
      } else if (scale == "unconstrained") {
        r.scale = RubricScale::Unconstrained;
      } else {
        throw Error(ErrorCode::ValidationError, "unknown rubric scale '" + scale + "'");
      }
    }
    for (const auto& jp : doc.at("principles")) {
      Principle p;
      p.name = jp.at("name").get<std::string>();
      p.principle_id = jp.contains("principle_id") ? jp.at("principle_id").get<std::string>() : slugify(p.name);
      p.description = jp.value("description", std::string{});
      const auto& criteria = jp.at("criteria");
      for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& jc = criteria[i];
        if (jc.is_string()) {
          p.criteria.push_back(Criterion{default_criterion_id(i), jc.get<std::string>()});
        } else {
          p.criteria.push_back(Criterion{jc.at("id").get<std::string>(), jc.at("text").get<std::string>()});
        }
      }
      if (jp.contains("desired_example")) p.desired_example = jp.at("desired_example").get<std::string>();
      if (jp.contains("undesired_example")) p.undesired_example = jp.at("undesired_example").get<std::string>();
      r.principles.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("rubric structure: ") + e.what());
  }
  r.validate();
  return r;
}

Rubric load_rubric(const std::filesystem::path& path) { return parse_rubric(detail::read_file(path)); }

void save_rubric(const Rubric& rubric, const std::filesystem::path& path) {
  rubric.validate();
  detail::write_file(path, rubric_to_json(rubric));
}

}  // namespace tutoreval
