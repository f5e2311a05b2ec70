import logging

from rest_framework import permissions, serializers, status, viewsets
from rest_framework.decorators import action
from rest_framework.response import Response

from coalition.exceptions import CoalitionError, TickCapExceeded
from coalition.runtime import run_coalition

from .exceptions import ScenarioError
from .loader import parse_scenario

logger = logging.getLogger(__name__)


class ScenarioTextSerializer(serializers.Serializer):
    scenario = serializers.CharField(trim_whitespace=False)


class ScenarioViewSet(viewsets.ViewSet):
    """
    Validate and run scenarios posted as text.
    Same exit semantics as the command line: 400 for input errors.
    """
    permission_classes = [permissions.AllowAny]

    def scenario_from(self, request):
        body = ScenarioTextSerializer(data=request.data)
        body.is_valid(raise_exception=True)
        return parse_scenario(body.validated_data['scenario'], source='<request>')

    @staticmethod
    def rejected(exc: ScenarioError):
        logger.warning("Rejected scenario with %s diagnostics", len(exc.diagnostics))
        return Response(
            {'valid': False, 'diagnostics': [d.as_dict() for d in exc.diagnostics]},
            status=status.HTTP_400_BAD_REQUEST
        )

    @action(detail=False, methods=['post'])
    def validate(self, request):
        """Diagnostics with line/column positions, or the scenario summary"""
        try:
            scenario = self.scenario_from(request)
        except ScenarioError as exc:
            return self.rejected(exc)
        return Response({
            'valid': True,
            'name': scenario.name,
            'agents': [agent['id'] for agent in scenario.agents],
        })

    @action(detail=False, methods=['post'])
    def run(self, request):
        """Run to completion and return the outcome with every trace record"""
        try:
            scenario = self.scenario_from(request)
        except ScenarioError as exc:
            return self.rejected(exc)

        try:
            result = run_coalition(scenario)
        except TickCapExceeded as exc:
            result = exc.run
        except CoalitionError as exc:
            return Response({'error': str(exc)}, status=status.HTTP_422_UNPROCESSABLE_ENTITY)

        return Response({
            'outcome': result.as_dict(),
            'trace': [event.as_dict() for event in result.trace],
        })
