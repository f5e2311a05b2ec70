class CoalitionError(Exception):
    """Base class for multi-agent runtime errors"""


class UnknownRecipient(CoalitionError):
    def __init__(self, recipient_id):
        super().__init__(f"No agent with id {recipient_id}")
        self.recipient_id = recipient_id


class UnknownSign(CoalitionError):
    def __init__(self, agent_id, names):
        super().__init__(f"Agent {agent_id} does not know sign(s): {', '.join(names)}")
        self.agent_id = agent_id
        self.names = tuple(names)


class CapabilityDenied(CoalitionError):
    def __init__(self, agent_id, obstacle_id):
        super().__init__(f"Agent {agent_id} cannot destroy obstacle {obstacle_id}")
        self.agent_id = agent_id
        self.obstacle_id = obstacle_id


class TickCapExceeded(CoalitionError):
    """Raised with the partial run attached"""

    def __init__(self, cap, run=None):
        super().__init__(f"Coalition did not settle within {cap} ticks")
        self.cap = cap
        self.run = run
