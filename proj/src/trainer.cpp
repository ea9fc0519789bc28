#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "wbc/errors.hpp"
#include "wbc/log.hpp"
#include "wbc/ppo.hpp"

namespace wbc {

namespace fs = std::filesystem;
using nlohmann::json;

Trainer::Trainer(std::vector<std::unique_ptr<Env>> envs, const NetworkSpec& spec, TrainConfig cfg,
                 AdrConfig adr, std::string out_dir, uint64_t seed)
    : envs_(std::move(envs)),
      cfg_(cfg),
      out_dir_(std::move(out_dir)),
      seed_(seed),
      params_(init_policy(spec, Rng::mix(seed, 0x9017))),
      adam_(params_),
      adr_(adr) {
  cfg_.validate();
  if (static_cast<int>(envs_.size()) != cfg_.n_workers)
    throw ConfigError("trainer: env count must equal n_workers");
  fs::create_directories(out_dir_);
}

std::string Trainer::checkpoint_path() const { return out_dir_ + "/checkpoint.wbc"; }
std::string Trainer::log_path() const { return out_dir_ + "/train_log.csv"; }

void Trainer::save_state() const {
  save_policy(params_, checkpoint_path());
  save_policy(adam_.m, out_dir_ + "/optimizer_m.wbc");
  save_policy(adam_.v, out_dir_ + "/optimizer_v.wbc");
  json j;
  j["steps_done"] = steps_done_;
  j["update_index"] = update_index_;
  j["episodes_total"] = episodes_total_;
  j["adam_t"] = adam_.t;
  j["d_h"] = adr_.tolerance();
  j["adr_window"] = adr_.window_contents();
  j["smoothed_reward"] = smoothed_reward_;
  j["smoothed_success"] = smoothed_success_;
  j["ema_init"] = ema_init_;
  j["seed"] = seed_;
  std::ofstream out(out_dir_ + "/trainer_state.json", std::ios::trunc);
  out << j.dump(2) << "\n";
}

void Trainer::resume(const std::string& dir) {
  std::ifstream in(dir + "/trainer_state.json");
  if (!in) throw IoError("trainer: no trainer_state.json in '" + dir + "'");
  json j = json::parse(in);
  params_ = load_policy(dir + "/checkpoint.wbc", params_.spec);
  adam_.m = load_policy(dir + "/optimizer_m.wbc", params_.spec);
  adam_.v = load_policy(dir + "/optimizer_v.wbc", params_.spec);
  adam_.t = j.at("adam_t").get<int64_t>();
  steps_done_ = j.at("steps_done").get<int64_t>();
  update_index_ = j.at("update_index").get<int>();
  episodes_total_ = j.at("episodes_total").get<int>();
  std::vector<uint8_t> window = j.at("adr_window").get<std::vector<uint8_t>>();
  adr_.restore(j.at("d_h").get<double>(), window);
  smoothed_reward_ = j.at("smoothed_reward").get<double>();
  smoothed_success_ = j.at("smoothed_success").get<double>();
  ema_init_ = j.at("ema_init").get<bool>();
  WBC_LOG_INFO("trainer: resumed at update %d (%lld steps)", update_index_,
               static_cast<long long>(steps_done_));
}

void Trainer::append_log(const Progress& p) {
  const std::string path = log_path();
  bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (fresh) {
    out << "update,steps,episodes,mean_episode_reward,smoothed_reward,success_rate,"
           "smoothed_success,d_h,lr,policy_loss,value_loss,entropy,clip_fraction,approx_kl,"
           "grad_norm\n";
  }
  char line[512];
  std::snprintf(line, sizeof(line),
                "%d,%lld,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.8f,%.6f,%.6f,%.6f,%.6f,%.8f,%.6f\n",
                p.update_index, static_cast<long long>(p.steps_done), p.episodes_total,
                p.mean_episode_reward, p.smoothed_reward, p.success_rate, p.smoothed_success,
                p.d_h, p.stats.lr, p.stats.policy_loss, p.stats.value_loss, p.stats.entropy,
                p.stats.clip_fraction, p.stats.approx_kl, p.stats.grad_norm);
  out << line;
  out.flush();
}

void Trainer::run(const StopFn& stop) {
  const auto t_start = std::chrono::steady_clock::now();
  std::vector<Rng> worker_rngs;
  while (steps_done_ < cfg_.total_steps) {
    // Phase-scoped rng streams: deterministic for (seed, update) and
    // independent of how a resumed run was split.
    worker_rngs.clear();
    for (int w = 0; w < cfg_.n_workers; ++w)
      worker_rngs.emplace_back(Rng::mix(seed_, static_cast<uint64_t>(update_index_), 0xc0 + w));
    RolloutBuffer buf = collect_rollouts(envs_, params_, cfg_, worker_rngs, adr_.tolerance());
    steps_done_ += buf.size();

    double ep_reward_sum = 0.0, success_sum = 0.0;
    for (const auto& [w, result] : buf.episodes) {
      ep_reward_sum += result.reward;
      success_sum += result.outcome == Outcome::kHoldSuccess ? 1.0 : 0.0;
      adr_.record(result.outcome == Outcome::kHoldSuccess);
    }
    const int n_eps = static_cast<int>(buf.episodes.size());
    episodes_total_ += n_eps;

    double progress = static_cast<double>(steps_done_) / static_cast<double>(cfg_.total_steps);
    Rng shuffle_rng(Rng::mix(seed_, static_cast<uint64_t>(update_index_), 0x5f));
    UpdateStats stats = ppo_update(params_, adam_, buf, cfg_, progress, shuffle_rng);
    ++update_index_;

    Progress p;
    p.update_index = update_index_;
    p.steps_done = steps_done_;
    p.episodes_total = episodes_total_;
    p.mean_episode_reward = n_eps > 0 ? ep_reward_sum / n_eps : smoothed_reward_;
    p.success_rate = n_eps > 0 ? success_sum / n_eps : smoothed_success_;
    if (!ema_init_ && n_eps > 0) {
      smoothed_reward_ = p.mean_episode_reward;
      smoothed_success_ = p.success_rate;
      ema_init_ = true;
    } else if (ema_init_) {
      smoothed_reward_ += kRewardEmaAlpha * (p.mean_episode_reward - smoothed_reward_);
      smoothed_success_ += kSuccessEmaAlpha * (p.success_rate - smoothed_success_);
    }
    p.smoothed_reward = smoothed_reward_;
    p.smoothed_success = smoothed_success_;
    p.d_h = adr_.tolerance();
    p.stats = stats;
    history_.push_back(p);
    append_log(p);

    if (update_index_ % std::max(1, cfg_.checkpoint_every) == 0) save_state();
    if (update_index_ % 10 == 0 || update_index_ == 1) {
      auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start);
      WBC_LOG_INFO(
          "update %d | steps %lld | eps %d | reward %.2f (ema %.2f) | success %.2f (ema %.2f) | "
          "d_h %.3f | kl %.2e | %.0fs",
          p.update_index, static_cast<long long>(p.steps_done), p.episodes_total,
          p.mean_episode_reward, p.smoothed_reward, p.success_rate, p.smoothed_success, p.d_h,
          p.stats.approx_kl, elapsed.count());
    }
    if (stop && stop(p)) {
      WBC_LOG_INFO("trainer: stop condition met at update %d", update_index_);
      break;
    }
  }
  save_state();
}

}  // namespace wbc
