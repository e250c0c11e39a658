#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "mec/actions.hpp"
#include "mec/ledger.hpp"
#include "mec/nn.hpp"
#include "mec/predictor.hpp"
#include "mec/rng.hpp"
#include "mec/types.hpp"

namespace mec {

// ---------------------------------------------------------------------------
// Observations. All entries live in [0,1]: resources are divided by their
// capacities, demand by what the local cpu can retire in one slot, payload by
// what the fattest incident link can move in one slot, and forecast
// inter-arrivals by a fixed ten-slot scale.
// ---------------------------------------------------------------------------

constexpr double kForecastInterarrivalScale = 10.0 * kSlotSeconds;

// Per-server partial view: [own remaining cpu, remaining bw toward each other
// server (ascending id, 0 when not linked), pending demand, pending payload].
std::vector<float> build_actor_state(const Topology& topo,
                                     const ResourceLedger& ledger, int m,
                                     double demand_gc, double payload_mb);
int actor_state_dim(const Topology& topo);

// Global view: every server's remaining cpu, every link's remaining bw, every
// server's pending demand, then per-server (inter-arrival, demand) forecasts.
// The forecast block is zero-filled when use_forecast is false.
std::vector<float> build_critic_state(const Topology& topo,
                                      const ResourceLedger& ledger,
                                      const std::vector<double>& demand_gc,
                                      const Prediction& forecast,
                                      bool use_forecast);
int critic_state_dim(const Topology& topo);

// Flat layout of a ContinuousAction: offload fractions (ascending other-server
// id), compute ratio, bandwidth ratios (same order).
int continuous_action_dim(const Topology& topo);
std::vector<float> flatten_continuous(const Topology& topo,
                                      const ContinuousAction& a);
ContinuousAction unflatten_continuous(const Topology& topo,
                                      const std::vector<float>& flat);

// ---------------------------------------------------------------------------
// Exploration and reward machinery.
// ---------------------------------------------------------------------------

// Mean-reverting exploration noise, one state per action dimension:
// x <- x + beta*(mu - x) + sigma*N(0,1) per step (unit time step).
class OUNoise {
 public:
  OUNoise(int dim, double mu, double sigma, double beta);
  // Advances the process and returns scale * state.
  std::vector<double> step(double scale, std::mt19937_64& rng);
  void reset();
  const std::vector<double>& state() const { return x_; }

 private:
  double mu_, sigma_, beta_;
  std::vector<double> x_;
};

// Sliding windows of recent slot totals; the baseline is the mean of the k
// smallest entries currently in the window (all entries while fewer than k).
class RewardBaseline {
 public:
  RewardBaseline(int window, int k);
  void update(double total_latency, double total_energy);
  double latency_star() const;
  double energy_star() const;
  bool empty() const { return latency_.empty(); }
  int size() const { return static_cast<int>(latency_.size()); }

 private:
  static double mean_of_smallest(const std::deque<double>& window, int k);
  int window_, k_;
  std::deque<double> latency_, energy_;
};

// r = lambda * L*/L + rho * E*/E. A non-positive total (degenerate slot)
// contributes its weight outright, matching the first-observation bootstrap
// where the baseline equals the observation.
double compute_reward(double total_latency, double total_energy,
                      const RewardBaseline& baseline,
                      const ObjectiveWeights& weights);

// ---------------------------------------------------------------------------
// Replay.
// ---------------------------------------------------------------------------

// One joint step of the team MDP over active slots. Idle servers carry the
// zero action: discrete index 0 (empty target set) and all-zero ratios.
struct Transition {
  std::vector<float> critic_state;
  std::vector<std::vector<float>> actor_states;  // one per server
  std::vector<int> discrete;                     // one index per server
  std::vector<std::vector<float>> continuous;    // one flat action per server
  std::vector<std::uint8_t> active;              // 1 where the server acted
  float reward = 0.0f;
  std::vector<float> next_critic_state;
  std::vector<std::vector<float>> next_actor_states;
};

// Bounded FIFO ring; sampling is uniform with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(const Transition& t);
  std::size_t size() const { return ring_.size(); }
  std::size_t capacity() const { return capacity_; }
  // i = 0 addresses the oldest retained transition.
  const Transition& at(std::size_t i) const;
  std::vector<const Transition*> sample(std::size_t n,
                                        std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next write position once the ring is full
  std::vector<Transition> ring_;
};

// ---------------------------------------------------------------------------
// The hybrid learner: a shared epsilon-greedy Q-network picks the offload
// target subset, per-server actors emit the continuous ratios, and per-server
// centralized critics score the joint action against the global state.
// ---------------------------------------------------------------------------

struct LearnerConfig {
  double learning_rate = 5e-4;
  double gamma = 0.99;
  double tau_dqn = 0.005;
  double tau_ddpg = 0.005;
  int batch_size = 300;
  int hidden_width = 256;  // two hidden layers throughout
  std::size_t agent_buffer_capacity = 50000;
  std::size_t global_buffer_capacity = 150000;
  double epsilon_initial = 1.0;
  double epsilon_decay = 0.9995;  // multiplicative, per training iteration
  double epsilon_floor = 0.01;
  double noise_scale_initial = 1.0;
  double noise_decay = 0.9995;
  double noise_floor = 0.01;
  double ou_mu = 0.0;
  double ou_sigma = 0.3;
  double ou_beta = 1.0;
  int global_sync_period = 10;  // every S-th iteration samples the global ring
  int train_rounds = 1;         // gradient iterations per learned transition
  std::uint64_t seed = 1;
  void validate() const;
};

class HybridLearner {
 public:
  HybridLearner(const Topology& topo, const LearnerConfig& cfg);

  // Epsilon-greedy over the powerset head; the overload with an explicit rate
  // backs deterministic tests.
  DiscreteAction select_discrete(const std::vector<float>& actor_state);
  DiscreteAction select_discrete(const std::vector<float>& actor_state,
                                 double exploration_rate);
  std::vector<float> q_values(const std::vector<float>& actor_state) const;

  // Deterministic actor output, perturbed by scaled OU noise when exploring,
  // clipped into [0,1] elementwise.
  ContinuousAction act_continuous(int agent,
                                  const std::vector<float>& actor_state,
                                  DiscreteAction d, bool explore);

  // Appends to the agent's own ring and the shared global ring. Rejects
  // incomplete transitions and out-of-range ratios.
  void store(const Transition& t, int agent);

  struct TrainStats {
    int dqn_updates = 0;
    int ddpg_updates = 0;
    double dqn_loss = 0.0;
    double critic_loss = 0.0;
    bool used_global_buffer = false;
  };
  // One asynchronous training iteration: each active agent samples its own
  // ring (the global ring every S-th iteration) and updates the shared
  // Q-network plus its actor-critic pair; exploration decays once per call.
  TrainStats train(const std::vector<int>& active_agents);

  // Critic value of a joint action, and its analytic gradient with respect to
  // the given agent's own continuous slice.
  double critic_value(int agent, const std::vector<float>& critic_state,
                      const std::vector<std::vector<float>>& joint_continuous,
                      const std::vector<int>& joint_discrete) const;
  std::vector<double> critic_action_gradient(
      int agent, const std::vector<float>& critic_state,
      const std::vector<std::vector<float>>& joint_continuous,
      const std::vector<int>& joint_discrete) const;

  double epsilon() const { return epsilon_; }
  double noise_scale() const { return noise_scale_; }
  int training_iterations() const { return iterations_; }
  long long gradient_steps() const { return gradient_steps_; }
  int num_servers() const { return num_servers_; }
  const LearnerConfig& config() const { return cfg_; }

  const ReplayBuffer& agent_buffer(int agent) const;
  const ReplayBuffer& global_buffer() const { return global_; }

  MLP<float>& q_net() { return q_; }
  MLP<float>& q_target() { return q_target_; }
  MLP<float>& actor(int agent) { return agents_.at(agent).actor; }
  MLP<float>& actor_target(int agent) { return agents_.at(agent).actor_target; }
  MLP<float>& critic(int agent) { return agents_.at(agent).critic; }
  MLP<float>& critic_target(int agent) {
    return agents_.at(agent).critic_target;
  }
  const MLP<float>& critic(int agent) const { return agents_.at(agent).critic; }

  // Network parameters only; buffers are not persisted.
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  struct AgentNets {
    MLP<float> actor, actor_target;
    MLP<float> critic, critic_target;
    Adam<float> actor_opt, critic_opt;
    OUNoise noise;
  };

  void validate_transition(const Transition& t) const;
  double train_dqn(int agent, const std::vector<const Transition*>& batch);
  double train_ddpg(int agent, const std::vector<const Transition*>& batch);

  LearnerConfig cfg_;
  int num_servers_;
  int action_count_;     // discrete head width
  int actor_state_dim_;
  int critic_state_dim_;
  int cont_dim_;
  double epsilon_;
  double noise_scale_;
  int iterations_ = 0;
  long long gradient_steps_ = 0;
  std::mt19937_64 rng_;
  MLP<float> q_, q_target_;
  Adam<float> q_opt_;
  std::vector<AgentNets> agents_;
  std::vector<ReplayBuffer> buffers_;
  ReplayBuffer global_;
};

}  // namespace mec
