#include "mec/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "mec/tensor_io.hpp"

namespace mec {

namespace {

constexpr std::uint32_t kLearnerMagic = 0x4d454341;  // "MECA"

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// First index of the column maximum; explicit loop keeps ties deterministic.
int argmax_col(const Mat<float>& m, int col) {
  int best = 0;
  for (int r = 1; r < m.rows(); ++r)
    if (m(r, col) > m(best, col)) best = r;
  return best;
}

Mat<float> to_column(const std::vector<float>& v) {
  Mat<float> out(static_cast<int>(v.size()), 1);
  for (int i = 0; i < out.rows(); ++i) out(i, 0) = v[i];
  return out;
}

// [critic state; every server's continuous action; every server's discrete
// one-hot], columns are batch entries.
Mat<float> assemble_critic_input(const Mat<float>& critic_states,
                                 const std::vector<Mat<float>>& continuous,
                                 const std::vector<Mat<float>>& onehots) {
  const int batch = static_cast<int>(critic_states.cols());
  int rows = static_cast<int>(critic_states.rows());
  for (const auto& a : continuous) rows += static_cast<int>(a.rows());
  for (const auto& o : onehots) rows += static_cast<int>(o.rows());
  Mat<float> x(rows, batch);
  int off = static_cast<int>(critic_states.rows());
  x.topRows(off) = critic_states;
  for (const auto& a : continuous) {
    x.middleRows(off, a.rows()) = a;
    off += static_cast<int>(a.rows());
  }
  for (const auto& o : onehots) {
    x.middleRows(off, o.rows()) = o;
    off += static_cast<int>(o.rows());
  }
  return x;
}

Mat<float> onehot_batch(const std::vector<int>& indices, int count) {
  Mat<float> out = Mat<float>::Zero(count, static_cast<int>(indices.size()));
  for (int i = 0; i < out.cols(); ++i) out(indices[i], i) = 1.0f;
  return out;
}

}  // namespace

// --------------------------------------------------------------------------
// Observations.
// --------------------------------------------------------------------------

int actor_state_dim(const Topology& topo) { return topo.num_servers() + 2; }

std::vector<float> build_actor_state(const Topology& topo,
                                     const ResourceLedger& ledger, int m,
                                     double demand_gc, double payload_mb) {
  std::vector<float> s;
  s.reserve(actor_state_dim(topo));
  const ServerSpec& self = topo.server(m);
  s.push_back(static_cast<float>(ledger.remaining_cpu(m) / self.cpu_capacity));
  double max_bw = 0.0;
  for (int n = 0; n < topo.num_servers(); ++n) {
    if (n == m) continue;
    const int k = topo.link_between(m, n);
    if (k < 0) {
      s.push_back(0.0f);
      continue;
    }
    s.push_back(
        static_cast<float>(ledger.remaining_bw(k) / ledger.bw_capacity(k)));
    max_bw = std::max(max_bw, ledger.bw_capacity(k));
  }
  s.push_back(static_cast<float>(
      clamp01(demand_gc / (self.cpu_capacity * kSlotSeconds))));
  const double payload_scale = max_bw * kSlotSeconds / kBitsPerMegabyte;
  s.push_back(static_cast<float>(
      payload_scale > 0.0 ? clamp01(payload_mb / payload_scale) : 0.0));
  return s;
}

int critic_state_dim(const Topology& topo) {
  return 2 * topo.num_servers() + topo.num_links() + 2 * topo.num_servers();
}

std::vector<float> build_critic_state(const Topology& topo,
                                      const ResourceLedger& ledger,
                                      const std::vector<double>& demand_gc,
                                      const Prediction& forecast,
                                      bool use_forecast) {
  const int m_count = topo.num_servers();
  if (static_cast<int>(demand_gc.size()) != m_count)
    throw std::invalid_argument("one pending demand per server is required");
  if (use_forecast && static_cast<int>(forecast.size()) != m_count)
    throw std::invalid_argument("one forecast per server is required");
  std::vector<float> s;
  s.reserve(critic_state_dim(topo));
  for (int m = 0; m < m_count; ++m)
    s.push_back(static_cast<float>(ledger.remaining_cpu(m) /
                                   topo.server(m).cpu_capacity));
  for (int k = 0; k < topo.num_links(); ++k)
    s.push_back(
        static_cast<float>(ledger.remaining_bw(k) / ledger.bw_capacity(k)));
  for (int m = 0; m < m_count; ++m)
    s.push_back(static_cast<float>(clamp01(
        demand_gc[m] / (topo.server(m).cpu_capacity * kSlotSeconds))));
  for (int m = 0; m < m_count; ++m) {
    if (!use_forecast) {
      s.push_back(0.0f);
      s.push_back(0.0f);
      continue;
    }
    s.push_back(static_cast<float>(
        clamp01(forecast[m].next_interarrival / kForecastInterarrivalScale)));
    s.push_back(static_cast<float>(clamp01(
        forecast[m].next_demand / (topo.server(m).cpu_capacity * kSlotSeconds))));
  }
  return s;
}

int continuous_action_dim(const Topology& topo) {
  return 2 * (topo.num_servers() - 1) + 1;
}

std::vector<float> flatten_continuous(const Topology& topo,
                                      const ContinuousAction& a) {
  const int others = topo.num_servers() - 1;
  if (static_cast<int>(a.offload_frac.size()) != others ||
      static_cast<int>(a.bandwidth_ratio.size()) != others)
    throw std::invalid_argument("continuous action has the wrong arity");
  std::vector<float> flat;
  flat.reserve(continuous_action_dim(topo));
  for (double v : a.offload_frac) flat.push_back(static_cast<float>(v));
  flat.push_back(static_cast<float>(a.compute_ratio));
  for (double v : a.bandwidth_ratio) flat.push_back(static_cast<float>(v));
  return flat;
}

ContinuousAction unflatten_continuous(const Topology& topo,
                                      const std::vector<float>& flat) {
  const int others = topo.num_servers() - 1;
  if (static_cast<int>(flat.size()) != continuous_action_dim(topo))
    throw std::invalid_argument("flat continuous action has the wrong size");
  ContinuousAction a;
  a.offload_frac.assign(flat.begin(), flat.begin() + others);
  a.compute_ratio = flat[others];
  a.bandwidth_ratio.assign(flat.begin() + others + 1, flat.end());
  return a;
}

// --------------------------------------------------------------------------
// Exploration and reward.
// --------------------------------------------------------------------------

OUNoise::OUNoise(int dim, double mu, double sigma, double beta)
    : mu_(mu), sigma_(sigma), beta_(beta), x_(dim, mu) {
  if (dim < 1) throw std::invalid_argument("noise needs at least one dimension");
}

std::vector<double> OUNoise::step(double scale, std::mt19937_64& rng) {
  std::vector<double> out(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) {
    x_[i] += beta_ * (mu_ - x_[i]) + sigma_ * gaussian(rng);
    out[i] = scale * x_[i];
  }
  return out;
}

void OUNoise::reset() { std::fill(x_.begin(), x_.end(), mu_); }

RewardBaseline::RewardBaseline(int window, int k) : window_(window), k_(k) {
  if (window < 1 || k < 1 || k > window)
    throw std::invalid_argument("baseline needs 1 <= k <= window");
}

void RewardBaseline::update(double total_latency, double total_energy) {
  if (!std::isfinite(total_latency) || !std::isfinite(total_energy))
    throw std::invalid_argument("baseline totals must be finite");
  latency_.push_back(total_latency);
  energy_.push_back(total_energy);
  if (static_cast<int>(latency_.size()) > window_) {
    latency_.pop_front();
    energy_.pop_front();
  }
}

double RewardBaseline::mean_of_smallest(const std::deque<double>& window,
                                        int k) {
  if (window.empty())
    throw std::logic_error("baseline queried before any observation");
  std::vector<double> v(window.begin(), window.end());
  const int take = std::min<int>(k, static_cast<int>(v.size()));
  std::partial_sort(v.begin(), v.begin() + take, v.end());
  double sum = 0.0;
  for (int i = 0; i < take; ++i) sum += v[i];
  return sum / take;
}

double RewardBaseline::latency_star() const {
  return mean_of_smallest(latency_, k_);
}

double RewardBaseline::energy_star() const {
  return mean_of_smallest(energy_, k_);
}

double compute_reward(double total_latency, double total_energy,
                      const RewardBaseline& baseline,
                      const ObjectiveWeights& weights) {
  const double lat_term =
      total_latency > 0.0
          ? weights.lambda_latency * baseline.latency_star() / total_latency
          : weights.lambda_latency;
  const double energy_term =
      total_energy > 0.0
          ? weights.rho_energy * baseline.energy_star() / total_energy
          : weights.rho_energy;
  return lat_term + energy_term;
}

// --------------------------------------------------------------------------
// Replay.
// --------------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("buffer capacity must be > 0");
  ring_.reserve(std::min<std::size_t>(capacity, 4096));
}

void ReplayBuffer::push(const Transition& t) {
  if (ring_.size() < capacity_) {
    ring_.push_back(t);
    return;
  }
  ring_[head_] = t;
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= ring_.size()) throw std::out_of_range("replay index out of range");
  if (ring_.size() < capacity_) return ring_[i];
  return ring_[(head_ + i) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(
    std::size_t n, std::mt19937_64& rng) const {
  if (ring_.empty()) throw std::logic_error("sampling an empty replay buffer");
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = std::min<std::size_t>(
        ring_.size() - 1,
        static_cast<std::size_t>(uniform01(rng) * ring_.size()));
    out.push_back(&ring_[idx]);
  }
  return out;
}

// --------------------------------------------------------------------------
// Learner.
// --------------------------------------------------------------------------

void LearnerConfig::validate() const {
  if (learning_rate <= 0.0) throw std::invalid_argument("learning rate must be > 0");
  if (gamma < 0.0 || gamma >= 1.0)
    throw std::invalid_argument("discount must lie in [0,1)");
  if (tau_dqn <= 0.0 || tau_dqn > 1.0 || tau_ddpg <= 0.0 || tau_ddpg > 1.0)
    throw std::invalid_argument("soft-update coefficients must lie in (0,1]");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (hidden_width < 1) throw std::invalid_argument("hidden width must be >= 1");
  if (agent_buffer_capacity == 0 || global_buffer_capacity == 0)
    throw std::invalid_argument("buffer capacities must be > 0");
  if (epsilon_decay <= 0.0 || epsilon_decay > 1.0 || noise_decay <= 0.0 ||
      noise_decay > 1.0)
    throw std::invalid_argument("decay factors must lie in (0,1]");
  if (epsilon_floor < 0.0 || epsilon_floor > epsilon_initial ||
      noise_floor < 0.0 || noise_floor > noise_scale_initial)
    throw std::invalid_argument("exploration floors must not exceed initials");
  if (global_sync_period < 1)
    throw std::invalid_argument("global sync period must be >= 1");
  if (train_rounds < 1)
    throw std::invalid_argument("train rounds must be >= 1");
}

HybridLearner::HybridLearner(const Topology& topo, const LearnerConfig& cfg)
    : cfg_(cfg),
      num_servers_(topo.num_servers()),
      action_count_(discrete_action_count(topo.num_servers())),
      actor_state_dim_(actor_state_dim(topo)),
      critic_state_dim_(critic_state_dim(topo)),
      cont_dim_(continuous_action_dim(topo)),
      epsilon_(cfg.epsilon_initial),
      noise_scale_(cfg.noise_scale_initial),
      rng_(seeded_rng(cfg.seed, 0xac7e)),
      global_(cfg.global_buffer_capacity) {
  cfg_.validate();
  const int h = cfg_.hidden_width;
  std::mt19937_64 init = seeded_rng(cfg_.seed, 0x11);
  q_ = MLP<float>({actor_state_dim_, h, h, action_count_}, Act::None, init);
  q_target_ = q_;
  q_opt_.lr = cfg_.learning_rate;

  const int critic_in = critic_state_dim_ +
                        num_servers_ * (cont_dim_ + action_count_);
  for (int m = 0; m < num_servers_; ++m) {
    std::mt19937_64 arng = seeded_rng(cfg_.seed, 0x100 + m);
    AgentNets nets{
        MLP<float>({actor_state_dim_ + action_count_, h, h, cont_dim_},
                   Act::Sigmoid, arng),
        MLP<float>(), MLP<float>({critic_in, h, h, 1}, Act::None, arng),
        MLP<float>(), Adam<float>(), Adam<float>(),
        OUNoise(cont_dim_, cfg_.ou_mu, cfg_.ou_sigma, cfg_.ou_beta)};
    nets.actor_target = nets.actor;
    nets.critic_target = nets.critic;
    nets.actor_opt.lr = cfg_.learning_rate;
    nets.critic_opt.lr = cfg_.learning_rate;
    agents_.push_back(std::move(nets));
    buffers_.emplace_back(cfg_.agent_buffer_capacity);
  }
}

std::vector<float> HybridLearner::q_values(
    const std::vector<float>& actor_state) const {
  if (static_cast<int>(actor_state.size()) != actor_state_dim_)
    throw std::invalid_argument("actor state has the wrong dimension");
  const Mat<float> q = q_.forward(to_column(actor_state));
  std::vector<float> out(action_count_);
  for (int i = 0; i < action_count_; ++i) out[i] = q(i, 0);
  return out;
}

DiscreteAction HybridLearner::select_discrete(
    const std::vector<float>& actor_state) {
  return select_discrete(actor_state, epsilon_);
}

DiscreteAction HybridLearner::select_discrete(
    const std::vector<float>& actor_state, double exploration_rate) {
  if (uniform01(rng_) < exploration_rate) {
    const int idx = std::min(
        action_count_ - 1, static_cast<int>(uniform01(rng_) * action_count_));
    return DiscreteAction{idx};
  }
  const std::vector<float> q = q_values(actor_state);
  int best = 0;
  for (int i = 1; i < action_count_; ++i)
    if (q[i] > q[best]) best = i;
  return DiscreteAction{best};
}

ContinuousAction HybridLearner::act_continuous(
    int agent, const std::vector<float>& actor_state, DiscreteAction d,
    bool explore) {
  if (agent < 0 || agent >= num_servers_)
    throw std::out_of_range("agent id out of range");
  if (d.index < 0 || d.index >= action_count_)
    throw std::invalid_argument("discrete action index out of range");
  std::vector<float> input = actor_state;
  input.resize(actor_state_dim_ + action_count_, 0.0f);
  input[actor_state_dim_ + d.index] = 1.0f;
  const Mat<float> y = agents_[agent].actor.forward(to_column(input));

  std::vector<float> flat(cont_dim_);
  if (explore) {
    const std::vector<double> noise =
        agents_[agent].noise.step(noise_scale_, rng_);
    for (int i = 0; i < cont_dim_; ++i)
      flat[i] = static_cast<float>(clamp01(y(i, 0) + noise[i]));
  } else {
    for (int i = 0; i < cont_dim_; ++i)
      flat[i] = static_cast<float>(clamp01(y(i, 0)));
  }

  const int others = num_servers_ - 1;
  ContinuousAction a;
  a.offload_frac.assign(flat.begin(), flat.begin() + others);
  a.compute_ratio = flat[others];
  a.bandwidth_ratio.assign(flat.begin() + others + 1, flat.end());
  return a;
}

void HybridLearner::validate_transition(const Transition& t) const {
  const auto m = static_cast<std::size_t>(num_servers_);
  if (t.actor_states.size() != m || t.next_actor_states.size() != m ||
      t.discrete.size() != m || t.continuous.size() != m || t.active.size() != m)
    throw std::invalid_argument("transition is missing per-server entries");
  if (static_cast<int>(t.critic_state.size()) != critic_state_dim_ ||
      static_cast<int>(t.next_critic_state.size()) != critic_state_dim_)
    throw std::invalid_argument("critic state has the wrong dimension");
  if (!std::isfinite(t.reward))
    throw std::invalid_argument("transition reward must be finite");
  for (std::size_t j = 0; j < m; ++j) {
    if (static_cast<int>(t.actor_states[j].size()) != actor_state_dim_ ||
        static_cast<int>(t.next_actor_states[j].size()) != actor_state_dim_)
      throw std::invalid_argument("actor state has the wrong dimension");
    if (t.discrete[j] < 0 || t.discrete[j] >= action_count_)
      throw std::invalid_argument("discrete action index out of range");
    if (static_cast<int>(t.continuous[j].size()) != cont_dim_)
      throw std::invalid_argument("continuous action has the wrong dimension");
    for (float v : t.continuous[j])
      if (!(v >= 0.0f && v <= 1.0f))
        throw std::invalid_argument("stored ratios must lie in [0,1]");
    if (!t.active[j]) {
      if (t.discrete[j] != 0)
        throw std::invalid_argument("idle servers must store the zero action");
      for (float v : t.continuous[j])
        if (v != 0.0f)
          throw std::invalid_argument("idle servers must store the zero action");
    }
  }
}

void HybridLearner::store(const Transition& t, int agent) {
  if (agent < 0 || agent >= num_servers_)
    throw std::out_of_range("agent id out of range");
  validate_transition(t);
  buffers_[agent].push(t);
  global_.push(t);
}

const ReplayBuffer& HybridLearner::agent_buffer(int agent) const {
  return buffers_.at(agent);
}

double HybridLearner::train_dqn(int agent,
                                const std::vector<const Transition*>& batch) {
  const int b = static_cast<int>(batch.size());
  Mat<float> x(actor_state_dim_, b), xn(actor_state_dim_, b);
  std::vector<int> actions(b);
  for (int i = 0; i < b; ++i) {
    const Transition& t = *batch[i];
    for (int r = 0; r < actor_state_dim_; ++r) {
      x(r, i) = t.actor_states[agent][r];
      xn(r, i) = t.next_actor_states[agent][r];
    }
    actions[i] = t.discrete[agent];
  }

  const Mat<float> q_next = q_target_.forward(xn);
  MLP<float>::Cache cache;
  const Mat<float> q = q_.train_forward(x, cache);
  Mat<float> dy = Mat<float>::Zero(action_count_, b);
  double loss = 0.0;
  for (int i = 0; i < b; ++i) {
    const float target = batch[i]->reward +
                         static_cast<float>(cfg_.gamma) *
                             q_next.col(i).maxCoeff();
    const float diff = q(actions[i], i) - target;
    loss += static_cast<double>(diff) * diff;
    dy(actions[i], i) = 2.0f * diff / static_cast<float>(b);
  }
  loss /= b;

  q_.zero_grad();
  q_.backward(cache, dy);
  q_opt_.step(q_);
  ++gradient_steps_;
  soft_update(q_target_, q_, static_cast<float>(cfg_.tau_dqn));
  return loss;
}

double HybridLearner::train_ddpg(int agent,
                                 const std::vector<const Transition*>& batch) {
  const int b = static_cast<int>(batch.size());
  AgentNets& nets = agents_[agent];

  Mat<float> cs(critic_state_dim_, b), cs_next(critic_state_dim_, b);
  Mat<float> rewards(1, b);
  std::vector<Mat<float>> cont(num_servers_), onehots(num_servers_);
  std::vector<Mat<float>> next_states(num_servers_);
  for (int j = 0; j < num_servers_; ++j) {
    cont[j].resize(cont_dim_, b);
    next_states[j].resize(actor_state_dim_, b);
  }
  std::vector<std::vector<int>> disc(num_servers_, std::vector<int>(b));
  for (int i = 0; i < b; ++i) {
    const Transition& t = *batch[i];
    for (int r = 0; r < critic_state_dim_; ++r) {
      cs(r, i) = t.critic_state[r];
      cs_next(r, i) = t.next_critic_state[r];
    }
    rewards(0, i) = t.reward;
    for (int j = 0; j < num_servers_; ++j) {
      disc[j][i] = t.discrete[j];
      for (int r = 0; r < cont_dim_; ++r) cont[j](r, i) = t.continuous[j][r];
      for (int r = 0; r < actor_state_dim_; ++r)
        next_states[j](r, i) = t.next_actor_states[j][r];
    }
  }
  for (int j = 0; j < num_servers_; ++j)
    onehots[j] = onehot_batch(disc[j], action_count_);

  // Bootstrapped target: every agent's next discrete choice comes from the
  // target Q-network's greedy head, its ratios from the target actor.
  std::vector<Mat<float>> next_cont(num_servers_), next_onehots(num_servers_);
  for (int j = 0; j < num_servers_; ++j) {
    const Mat<float> qn = q_target_.forward(next_states[j]);
    std::vector<int> greedy(b);
    for (int i = 0; i < b; ++i) greedy[i] = argmax_col(qn, i);
    next_onehots[j] = onehot_batch(greedy, action_count_);
    Mat<float> actor_in(actor_state_dim_ + action_count_, b);
    actor_in.topRows(actor_state_dim_) = next_states[j];
    actor_in.bottomRows(action_count_) = next_onehots[j];
    next_cont[j] = agents_[j].actor_target.forward(actor_in);
  }
  const Mat<float> target_q = nets.critic_target.forward(
      assemble_critic_input(cs_next, next_cont, next_onehots));
  Mat<float> y(1, b);
  for (int i = 0; i < b; ++i)
    y(0, i) = rewards(0, i) + static_cast<float>(cfg_.gamma) * target_q(0, i);

  // Critic regression toward the bootstrapped target.
  const Mat<float> critic_x = assemble_critic_input(cs, cont, onehots);
  MLP<float>::Cache critic_cache;
  const Mat<float> qv = nets.critic.train_forward(critic_x, critic_cache);
  Mat<float> dy(1, b);
  double loss = 0.0;
  for (int i = 0; i < b; ++i) {
    const float diff = qv(0, i) - y(0, i);
    loss += static_cast<double>(diff) * diff;
    dy(0, i) = 2.0f * diff / static_cast<float>(b);
  }
  loss /= b;
  nets.critic.zero_grad();
  nets.critic.backward(critic_cache, dy);
  nets.critic_opt.step(nets.critic);
  ++gradient_steps_;
  soft_update(nets.critic_target, nets.critic,
              static_cast<float>(cfg_.tau_ddpg));

  // Actor ascent: replace this agent's slice with fresh actor output, push
  // the critic's action-gradient back through the actor.
  Mat<float> actor_in(actor_state_dim_ + action_count_, b);
  for (int i = 0; i < b; ++i)
    for (int r = 0; r < actor_state_dim_; ++r)
      actor_in(r, i) = batch[i]->actor_states[agent][r];
  actor_in.bottomRows(action_count_) = onehots[agent];
  MLP<float>::Cache actor_cache;
  std::vector<Mat<float>> cont_pi = cont;
  cont_pi[agent] = nets.actor.train_forward(actor_in, actor_cache);
  MLP<float>::Cache value_cache;
  nets.critic.train_forward(assemble_critic_input(cs, cont_pi, onehots),
                            value_cache);
  const Mat<float> dq =
      Mat<float>::Constant(1, b, -1.0f / static_cast<float>(b));
  nets.critic.zero_grad();
  const Mat<float> dx = nets.critic.backward(value_cache, dq);
  nets.critic.zero_grad();
  const Mat<float> da =
      dx.middleRows(critic_state_dim_ + agent * cont_dim_, cont_dim_);
  nets.actor.zero_grad();
  nets.actor.backward(actor_cache, da);
  nets.actor_opt.step(nets.actor);
  ++gradient_steps_;
  soft_update(nets.actor_target, nets.actor, static_cast<float>(cfg_.tau_ddpg));
  return loss;
}

HybridLearner::TrainStats HybridLearner::train(
    const std::vector<int>& active_agents) {
  ++iterations_;
  TrainStats stats;
  stats.used_global_buffer =
      iterations_ % cfg_.global_sync_period == 0;
  for (int m : active_agents) {
    if (m < 0 || m >= num_servers_)
      throw std::out_of_range("agent id out of range");
    const ReplayBuffer& buf = stats.used_global_buffer ? global_ : buffers_[m];
    if (buf.size() < static_cast<std::size_t>(cfg_.batch_size)) continue;
    const auto batch =
        buf.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
    stats.dqn_loss += train_dqn(m, batch);
    ++stats.dqn_updates;
    stats.critic_loss += train_ddpg(m, batch);
    ++stats.ddpg_updates;
  }
  if (stats.dqn_updates > 0) stats.dqn_loss /= stats.dqn_updates;
  if (stats.ddpg_updates > 0) stats.critic_loss /= stats.ddpg_updates;
  epsilon_ = std::max(cfg_.epsilon_floor, epsilon_ * cfg_.epsilon_decay);
  noise_scale_ = std::max(cfg_.noise_floor, noise_scale_ * cfg_.noise_decay);
  return stats;
}

double HybridLearner::critic_value(
    int agent, const std::vector<float>& critic_state,
    const std::vector<std::vector<float>>& joint_continuous,
    const std::vector<int>& joint_discrete) const {
  std::vector<Mat<float>> cont, onehots;
  for (int j = 0; j < num_servers_; ++j) {
    cont.push_back(to_column(joint_continuous.at(j)));
    onehots.push_back(onehot_batch({joint_discrete.at(j)}, action_count_));
  }
  const Mat<float> x =
      assemble_critic_input(to_column(critic_state), cont, onehots);
  return agents_.at(agent).critic.forward(x)(0, 0);
}

std::vector<double> HybridLearner::critic_action_gradient(
    int agent, const std::vector<float>& critic_state,
    const std::vector<std::vector<float>>& joint_continuous,
    const std::vector<int>& joint_discrete) const {
  std::vector<Mat<float>> cont, onehots;
  for (int j = 0; j < num_servers_; ++j) {
    cont.push_back(to_column(joint_continuous.at(j)));
    onehots.push_back(onehot_batch({joint_discrete.at(j)}, action_count_));
  }
  const Mat<float> x =
      assemble_critic_input(to_column(critic_state), cont, onehots);
  MLP<float> probe = agents_.at(agent).critic;  // keep the learner const
  MLP<float>::Cache cache;
  probe.train_forward(x, cache);
  const Mat<float> dx = probe.backward(cache, Mat<float>::Constant(1, 1, 1.0f));
  std::vector<double> grad(cont_dim_);
  for (int r = 0; r < cont_dim_; ++r)
    grad[r] = dx(critic_state_dim_ + agent * cont_dim_ + r, 0);
  return grad;
}

void HybridLearner::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(reinterpret_cast<const char*>(&kLearnerMagic),
            sizeof(kLearnerMagic));
  const std::int32_t dims[6] = {num_servers_,      action_count_,
                                actor_state_dim_,  critic_state_dim_,
                                cont_dim_,         cfg_.hidden_width};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  write_mlp(out, q_);
  write_mlp(out, q_target_);
  for (const AgentNets& nets : agents_) {
    write_mlp(out, nets.actor);
    write_mlp(out, nets.actor_target);
    write_mlp(out, nets.critic);
    write_mlp(out, nets.critic_target);
  }
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

void HybridLearner::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  std::uint32_t magic = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  std::int32_t dims[6] = {};
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || magic != kLearnerMagic || dims[0] != num_servers_ ||
      dims[1] != action_count_ || dims[2] != actor_state_dim_ ||
      dims[3] != critic_state_dim_ || dims[4] != cont_dim_ ||
      dims[5] != cfg_.hidden_width)
    throw std::runtime_error("checkpoint does not match this learner: " + path);
  read_mlp(in, q_);
  read_mlp(in, q_target_);
  for (AgentNets& nets : agents_) {
    read_mlp(in, nets.actor);
    read_mlp(in, nets.actor_target);
    read_mlp(in, nets.critic);
    read_mlp(in, nets.critic_target);
  }
}

}  // namespace mec
