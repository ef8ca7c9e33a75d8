#include "dense/pointing/format.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>

#include "dense/core/error.hpp"
#include "dense/core/utf8.hpp"
#include "dense/core/validate.hpp"

namespace dense::pointing {

namespace {

constexpr std::string_view kOpen = "<point>";
constexpr std::string_view kClose = "</point>";

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct Coords {
  std::optional<Percent> x;
  std::optional<Percent> y;
};

Coords parse_coords(std::string_view body) {
  const auto comma = body.find(',');
  if (comma == std::string_view::npos || body.find(',', comma + 1) != std::string_view::npos) return {};
  return {Percent::parse(utf8::trim(body.substr(0, comma))), Percent::parse(utf8::trim(body.substr(comma + 1)))};
}

}  // namespace

std::string serialize_points(std::span<const PointAnnotation> points) {
  std::vector<const PointAnnotation*> ordered;
  ordered.reserve(points.size());
  for (const auto& p : points) {
    if (const auto v = validate(p); !v.empty()) {
      throw Error("INVALID_POINT", v.front().code + ": " + v.front().detail);
    }
    ordered.push_back(&p);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const PointAnnotation* a, const PointAnnotation* b) { return a->order < b->order; });
  std::string out;
  for (const auto* p : ordered) {
    out += kOpen;
    out += p->x.str();
    out += ',';
    out += p->y.str();
    out += kClose;
    out += ' ';
    out += utf8::trim(p->name);
    out += "; ";
  }
  return out;
}

ParseResult parse_points(std::string_view text) {
  ParseResult result;
  std::string residual;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t start = text.find(kOpen, pos);
    if (start == std::string_view::npos) {
      residual.append(text.substr(pos));
      break;
    }
    residual.append(text.substr(pos, start - pos));
    const std::size_t body_start = start + kOpen.size();
    const std::size_t close = text.find(kClose, body_start);
    const std::size_t next_open = text.find(kOpen, body_start);
    if (close == std::string_view::npos || (next_open != std::string_view::npos && next_open < close)) {
      result.diagnostics.push_back({start, "UNCLOSED_TAG"});
      residual.append(text.substr(start, kOpen.size()));
      pos = body_start;
      continue;
    }

    const std::string_view body = text.substr(body_start, close - body_start);
    const std::size_t after = close + kClose.size();
    const std::size_t stop = text.find_first_of(";<", after);
    std::size_t consumed_end = 0;
    std::string_view name_text;
    if (stop != std::string_view::npos && text[stop] == ';') {
      name_text = text.substr(after, stop - after);
      consumed_end = stop + 1;
      if (consumed_end < text.size() && text[consumed_end] == ' ') ++consumed_end;
    } else {
      // Lenient: an unterminated final entry runs to the end of its line.
      const std::size_t limit = stop == std::string_view::npos ? text.size() : stop;
      std::string_view tail = text.substr(after, limit - after);
      const std::size_t first_char = tail.find_first_not_of(' ');
      const std::size_t eol = tail.find('\n', first_char == std::string_view::npos ? 0 : first_char);
      if (eol != std::string_view::npos) tail = tail.substr(0, eol);
      name_text = tail;
      consumed_end = after + tail.size();
      result.diagnostics.push_back({start, "MISSING_SEPARATOR"});
    }

    const std::string name(utf8::trim(name_text));
    const Coords c = parse_coords(body);
    bool usable = true;
    if (!c.x || !c.y) {
      result.diagnostics.push_back({start, "MALFORMED_COORDS"});
      usable = false;
    }
    if (name.empty()) {
      result.diagnostics.push_back({start, "MISSING_NAME"});
      usable = false;
    }
    if (c.x && c.y && (!c.x->in_range() || !c.y->in_range())) {
      result.diagnostics.push_back({start, "COORD_RANGE"});
      if (usable) result.out_of_range.push_back({name, *c.x, *c.y, static_cast<int>(result.out_of_range.size())});
      usable = false;
    }
    if (usable) result.points.push_back({name, *c.x, *c.y, static_cast<int>(result.points.size())});
    pos = consumed_end;
  }
  result.residual = std::string(utf8::trim(residual));
  return result;
}

std::string build_training_response(std::string_view caption, std::span<const PointAnnotation> points) {
  if (utf8::trim(caption).empty()) throw Error("EMPTY_CAPTION", "training response needs a caption");
  std::string out(caption);
  out += '\n';
  out += serialize_points(points);
  return out;
}

GroundingReport grounding_report(const GroundedCaption& gold, std::string_view candidate_text) {
  const ParseResult parsed = parse_points(candidate_text);
  std::vector<PointAnnotation> named = parsed.points;
  named.insert(named.end(), parsed.out_of_range.begin(), parsed.out_of_range.end());

  GroundingReport report;
  report.out_of_range = static_cast<std::size_t>(
      std::count_if(parsed.diagnostics.begin(), parsed.diagnostics.end(),
                    [](const Diagnostic& d) { return d.reason == "COORD_RANGE"; }));

  const std::string caption = lower_ascii(parsed.residual);
  if (!named.empty()) {
    std::size_t found = 0;
    for (const auto& p : named) {
      if (caption.find(lower_ascii(p.name)) != std::string::npos) ++found;
    }
    report.consistency = static_cast<double>(found) / static_cast<double>(named.size());
  }

  std::set<std::tuple<std::string, std::int64_t, std::int64_t>> seen;
  for (const auto& p : named) {
    if (!seen.emplace(p.name, p.x.hundredths(), p.y.hundredths()).second) ++report.duplicates;
  }

  if (!gold.points.empty()) {
    std::set<std::string> candidate_names;
    for (const auto& p : named) candidate_names.insert(lower_ascii(p.name));
    std::size_t hit = 0;
    for (const auto& g : gold.points) {
      if (candidate_names.count(lower_ascii(utf8::trim(g.name)))) ++hit;
    }
    report.gold_name_recall = static_cast<double>(hit) / static_cast<double>(gold.points.size());
  }
  return report;
}

}  // namespace dense::pointing
