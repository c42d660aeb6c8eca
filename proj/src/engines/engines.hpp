// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "faasflow/engine.hpp"

namespace faasflow::detail {

/// External synchronous scheduler: not a function, logs every transition,
/// enforces state size and transition-rate limits.
class ClientSchedulerEngine final : public Engine {
 public:
  using Engine::Engine;

 protected:
  void drive(Runtime& runtime, const CompositionSpec& spec, Payload input, std::uint64_t execution,
             std::optional<InvocationId> parent, Finish finish) override;
};

/// A conductor action runs before every task and decides the next step.
class ReactiveConductorEngine final : public Engine {
 public:
  using Engine::Engine;

 protected:
  void drive(Runtime& runtime, const CompositionSpec& spec, Payload input, std::uint64_t execution,
             std::optional<InvocationId> parent, Finish finish) override;
};

/// Static chain of functions without conductor actions.
class SequenceNativeEngine final : public Engine {
 public:
  using Engine::Engine;
  void check(const CompositionSpec& spec) const override;

 protected:
  void drive(Runtime& runtime, const CompositionSpec& spec, Payload input, std::uint64_t execution,
             std::optional<InvocationId> parent, Finish finish) override;
};

/// The composition function orchestrates by itself, suspending while
/// children run.
class SuspendOrchestratorEngine final : public Engine {
 public:
  using Engine::Engine;

 protected:
  void drive(Runtime& runtime, const CompositionSpec& spec, Payload input, std::uint64_t execution,
             std::optional<InvocationId> parent, Finish finish) override;
  void host(const InvocationContext& ctx, const CompositionSpec& spec, std::uint64_t execution) override;

 private:
  void orchestrate(const InvocationContext& ctx, const Node& node, const std::string& name,
                   const std::string& base_path, std::uint64_t execution);
};

/// The composition function orchestrates while staying busy, awaiting each
/// child synchronously.
class InlineOrchestratorEngine final : public Engine {
 public:
  using Engine::Engine;

 protected:
  void drive(Runtime& runtime, const CompositionSpec& spec, Payload input, std::uint64_t execution,
             std::optional<InvocationId> parent, Finish finish) override;
  void host(const InvocationContext& ctx, const CompositionSpec& spec, std::uint64_t execution) override;
};

/// Name of a helper function registered by an engine, parameterised by a
/// duration so differently configured engines never share one.
std::string helper_name(const std::string& base, double duration_ms);

}  // namespace faasflow::detail
