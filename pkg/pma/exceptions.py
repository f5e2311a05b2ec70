class BehaviorPlanningError(Exception):
    """Base class for behavior planning errors"""


class SituationOutsideKnowledge(BehaviorPlanningError):
    def __init__(self, agent_id, names):
        super().__init__(f"Agent {agent_id} situations name unknown signs: {', '.join(names)}")
        self.agent_id = agent_id
        self.names = tuple(names)
