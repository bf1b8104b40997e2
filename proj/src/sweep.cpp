#include "ejuggle/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace ejuggle {

std::vector<double> WindowGrid::windows() const {
  if (count < 0) throw std::invalid_argument("window grid: negative count");
  if (count == 0) return {};
  if (!(min > 0.0) || !(max >= min)) throw std::invalid_argument("window grid: need 0 < min <= max");
  if (count == 1) return {min};
  if (max == min) throw std::invalid_argument("window grid: min == max with count > 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double f = static_cast<double>(k) / (count - 1);
    out[static_cast<std::size_t>(k)] =
        spacing == Spacing::log ? min * std::pow(max / min, f) : min + (max - min) * f;
  }
  out.back() = max;
  return out;
}

Scenario Scenario::ideal(const WindowGrid& grid) {
  Scenario s;
  s.label = "ideal";
  s.latency = 0.0;
  s.sigma_beta = 0.0;
  s.window_grid = grid.windows();
  return s;
}

Scenario Scenario::realistic(const WindowGrid& grid) {
  Scenario s;
  s.label = "realistic";
  s.latency = 100e-9;
  s.sigma_beta = std::sqrt(0.02);
  s.window_grid = grid.windows();
  return s;
}

void Scenario::validate() const {
  for (std::size_t k = 0; k < window_grid.size(); ++k) {
    if (!(window_grid[k] > 0.0)) throw std::invalid_argument("scenario: windows must be positive");
    if (k > 0 && !(window_grid[k] > window_grid[k - 1])) {
      throw std::invalid_argument("scenario: window grid must be strictly increasing");
    }
  }
  shot_config(window_grid.empty() ? 1e-9 : window_grid.front()).validate();
}

ShotConfig Scenario::shot_config(double window) const {
  ShotConfig c = base;
  c.window = window;
  c.latency = latency;
  c.sigma_beta = sigma_beta;
  c.eta = eta;
  c.schedule = schedule;
  return c;
}

SweepRow run_point(const SpeciesModel& model, const Scenario& scenario, double window,
                   const ChannelPair& channels) {
  SweepRow row;
  row.window = window;
  try {
    const ShotConfig config = scenario.shot_config(window);
    const ShotRun run = run_shots(model, config, channels);
    const REGEstimate est = estimate_reg(run, config);
    row.rate = est.rate;
    row.fidelity = est.fidelity;
    row.p_r = est.p_r;
    row.p_w = est.p_w;
    row.shots_to_steady = est.shots_to_steady;
  } catch (const std::exception& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.rate = row.fidelity = row.p_r = row.p_w = nan;
    row.shots_to_steady = -1;
    row.error = e.what();
    if (row.error.empty()) row.error = "unknown failure";
  }
  return row;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

std::vector<SweepResult> run_sweeps(std::span<const SweepJob> jobs, int workers) {
  struct Task {
    std::size_t job;
    std::size_t point;
  };
  std::vector<SweepResult> results(jobs.size());
  std::vector<ChannelPair> channels;
  std::vector<Task> tasks;
  channels.reserve(jobs.size());
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const SweepJob& job = jobs[j];
    if (job.model == nullptr) throw std::invalid_argument("sweep job without a species model");
    job.scenario.validate();
    results[j].species = job.model->name();
    results[j].scenario = job.scenario.label;
    results[j].rows.resize(job.scenario.window_grid.size());
    const ShotConfig probe = job.scenario.shot_config(1e-9);
    channels.push_back(make_channels(pulse_block(*job.model), probe));
    for (std::size_t p = 0; p < job.scenario.window_grid.size(); ++p) tasks.push_back({j, p});
  }
  parallel_for(tasks.size(), workers, [&](std::size_t k) {
    const Task& t = tasks[k];
    const SweepJob& job = jobs[t.job];
    results[t.job].rows[t.point] =
        run_point(*job.model, job.scenario, job.scenario.window_grid[t.point], channels[t.job]);
  });
  return results;
}

SweepResult run_sweep(const SpeciesModel& model, const Scenario& scenario, int workers) {
  const SweepJob job{&model, scenario};
  return run_sweeps(std::span(&job, 1), workers).front();
}

std::optional<Optimum> max_rate_at_fidelity(const SweepResult& result, double f_min) {
  if (result.rows.empty()) throw std::invalid_argument("max_rate_at_fidelity: empty grid");
  std::optional<Optimum> best;
  for (const SweepRow& row : result.rows) {
    if (!row.ok() || !(row.fidelity >= f_min)) continue;
    const bool better = !best || row.rate > best->rate ||
                        (row.rate == best->rate && row.window < best->window);
    if (better) best = Optimum{row.window, row.rate, row.fidelity};
  }
  return best;
}

namespace {

void put_number(std::ostream& out, double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw OutputError("cannot format number");
  out.write(buf, end - buf);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_field(const std::string& text, const char* column, std::size_t line) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw std::runtime_error("csv line " + std::to_string(line) + ": bad " + column + " '" + text + "'");
  }
  return value;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw OutputError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_csv(std::ostream& out, const SweepResult& result) {
  out << kCsvHeader << '\n';
  for (const SweepRow& row : result.rows) {
    out << result.species << ',' << result.scenario << ',';
    put_number(out, row.window);
    out << ',';
    put_number(out, row.rate);
    out << ',';
    put_number(out, row.fidelity);
    out << ',';
    put_number(out, row.p_r);
    out << ',';
    put_number(out, row.p_w);
    out << ',' << row.shots_to_steady << '\n';
  }
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  write_csv(out, result);
  out.flush();
  if (!out) throw OutputError("write failed for " + path.string());
}

SweepResult read_csv(std::istream& in) {
  SweepResult result;
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("csv: missing or unexpected header");
  }
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 8) throw std::runtime_error("csv line " + std::to_string(number) + ": expected 8 fields");
    if (result.rows.empty()) {
      result.species = f[0];
      result.scenario = f[1];
    } else if (f[0] != result.species || f[1] != result.scenario) {
      throw std::runtime_error("csv line " + std::to_string(number) + ": mixed species or scenario");
    }
    SweepRow row;
    row.window = parse_field<double>(f[2], "window_s", number);
    row.rate = parse_field<double>(f[3], "rate_per_s", number);
    row.fidelity = parse_field<double>(f[4], "fidelity", number);
    row.p_r = parse_field<double>(f[5], "p_r", number);
    row.p_w = parse_field<double>(f[6], "p_w", number);
    row.shots_to_steady = parse_field<long>(f[7], "shots_to_steady", number);
    if (std::isnan(row.rate)) row.error = "failed";
    result.rows.push_back(std::move(row));
  }
  return result;
}

SweepResult parse_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return read_csv(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void emit_plot(std::span<const SweepResult> curves, const std::filesystem::path& path,
               const PlotOptions& options) {
  std::ofstream out = open_output(path);
  write_plot(out, curves, options);
  out.flush();
  if (!out) throw OutputError("write failed for " + path.string());
}

}  // namespace ejuggle
