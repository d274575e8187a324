#include "vrql/summary.hpp"

#include "vrql/errors.hpp"
#include "vrql/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <string_view>

namespace vrql {

using nlohmann::json;

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line_no) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ValidationError("trace CSV line " + std::to_string(line_no) + ": bad number `" +
                          std::string(text) + "`");
  }
  return value;
}

json quartiles_json(const std::vector<double>& values) {
  if (values.empty()) return json{{"q1", nullptr}, {"median", nullptr}, {"q3", nullptr}};
  const Quartiles q = quartiles(values);
  return json{{"q1", q.q1}, {"median", q.median}, {"q3", q.q3}};
}

}  // namespace

std::vector<RunTrace> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trace CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceCsvHeader) throw ValidationError("trace CSV has an unexpected header: " + line);

  std::vector<RunTrace> traces;
  std::map<std::tuple<std::string, std::string, std::size_t>, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 7) {
      throw ValidationError("trace CSV line " + std::to_string(line_no) + ": expected 7 fields");
    }
    const std::string algorithm(fields[0]);
    const std::string gamma_text(fields[1]);
    const auto trial = parse_number<std::size_t>(fields[2], line_no);

    TracePhase phase;
    if (fields[4] == "inner") {
      phase = TracePhase::Inner;
    } else if (fields[4] == "epoch_end") {
      phase = TracePhase::EpochEnd;
    } else {
      throw ValidationError("trace CSV line " + std::to_string(line_no) + ": bad phase");
    }

    const auto key = std::make_tuple(algorithm, gamma_text, trial);
    auto it = index.find(key);
    if (it == index.end()) {
      RunTrace trace;
      trace.algorithm_tag = algorithm;
      trace.gamma = parse_number<double>(fields[1], line_no);
      trace.trial = trial;
      traces.push_back(std::move(trace));
      it = index.emplace(key, traces.size() - 1).first;
    }
    try {
      traces[it->second].add(parse_number<std::uint64_t>(fields[5], line_no),
                             parse_number<double>(fields[6], line_no),
                             parse_number<std::size_t>(fields[3], line_no), phase);
    } catch (const std::logic_error&) {
      throw ValidationError("trace CSV line " + std::to_string(line_no) +
                            ": samples do not increase within a trace");
    }
  }
  return traces;
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw ValidationError("quartiles of an empty sample");
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {at(0.25), at(0.5), at(0.75)};
}

std::optional<std::uint64_t> samples_to_epsilon(const RunTrace& trace, double epsilon) {
  for (const TraceRecord& r : trace.records) {
    if (r.linf_error <= epsilon) return r.cumulative_samples;
  }
  return std::nullopt;
}

std::optional<bool> meets_epoch_halving(const RunTrace& trace) {
  if (trace.records.empty()) return std::nullopt;
  const double initial = trace.records.front().linf_error;
  std::optional<bool> result;
  for (const TraceRecord& r : trace.records) {
    if (r.phase != TracePhase::EpochEnd || r.epoch == 0) continue;
    const bool ok = r.linf_error <= initial / std::pow(2.0, static_cast<double>(r.epoch));
    result = result.value_or(true) && ok;
  }
  return result;
}

json summarize_traces(const std::vector<RunTrace>& traces, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("summarize: epsilon must be > 0");

  std::vector<std::pair<std::string, double>> order;
  std::map<std::pair<std::string, double>, std::vector<const RunTrace*>> groups;
  for (const RunTrace& trace : traces) {
    const auto key = std::make_pair(trace.algorithm_tag, trace.gamma);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&trace);
  }

  json out{{"epsilon", epsilon}, {"groups", json::array()}};
  for (const auto& key : order) {
    const auto& members = groups.at(key);
    std::vector<double> reached;
    std::vector<double> final_errors;
    std::size_t halving_defined = 0;
    std::size_t halving_met = 0;
    for (const RunTrace* trace : members) {
      if (const auto n = samples_to_epsilon(*trace, epsilon)) reached.push_back(static_cast<double>(*n));
      if (!trace->records.empty()) final_errors.push_back(trace->records.back().linf_error);
      if (const auto halving = meets_epoch_halving(*trace)) {
        ++halving_defined;
        if (*halving) ++halving_met;
      }
    }
    json samples = quartiles_json(reached);
    samples["reached"] = reached.size();
    samples["unreached"] = members.size() - reached.size();

    json group{{"algorithm", key.first},
               {"gamma", key.second},
               {"trials", members.size()},
               {"samples_to_epsilon", samples},
               {"final_error", quartiles_json(final_errors)}};
    group["halving_fraction"] =
        halving_defined == 0 ? json(nullptr)
                             : json(static_cast<double>(halving_met) / static_cast<double>(halving_defined));
    out["groups"].push_back(std::move(group));
  }
  return out;
}

json summarize_csv(const std::filesystem::path& csv_path, double epsilon) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open " + csv_path.string());
  return summarize_traces(read_trace_csv(in), epsilon);
}

}  // namespace vrql
