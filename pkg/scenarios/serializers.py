from rest_framework import serializers

from signs.knowledge import feature_from_data


class PointField(serializers.ListField):
    """[x, y] pair"""

    def __init__(self, **kwargs):
        super().__init__(child=serializers.FloatField(), min_length=2, max_length=2, **kwargs)


class FeatureField(serializers.Field):
    """Sign link (plain name), sensor datum, personal feature or plan operator"""

    def to_internal_value(self, data):
        try:
            return feature_from_data(data).as_data()
        except (TypeError, ValueError, AttributeError):
            raise serializers.ValidationError(f"Not a feature: {data!r}")

    def to_representation(self, value):
        return value


class GroupsField(serializers.ListField):
    """List of feature groups"""

    def __init__(self, **kwargs):
        kwargs.setdefault('required', False)
        kwargs.setdefault('default', list)
        super().__init__(child=serializers.ListField(child=FeatureField(), allow_empty=False), **kwargs)


class SituationField(serializers.ListField):
    """List of sign-name groups"""

    def __init__(self, **kwargs):
        super().__init__(
            child=serializers.ListField(child=serializers.CharField(), allow_empty=False), **kwargs
        )


class ObstacleTypeSerializer(serializers.Serializer):
    destroyable_by = serializers.ListField(child=serializers.IntegerField(), required=False, default=list)


class ObstacleSerializer(serializers.Serializer):
    id = serializers.IntegerField()
    type = serializers.CharField()
    vertices = serializers.ListField(child=PointField(), min_length=3)


class WorldSerializer(serializers.Serializer):
    bounds = serializers.ListField(child=serializers.FloatField(), min_length=4, max_length=4)
    res = serializers.FloatField()
    obstacle_types = serializers.DictField(child=ObstacleTypeSerializer(), required=False, default=dict)
    obstacles = serializers.ListField(child=ObstacleSerializer(), required=False, default=list)


class RelationSerializer(serializers.Serializer):
    conditions = GroupsField()
    effects = GroupsField()
    label = serializers.CharField(required=False)

    def validate(self, attrs):
        if not attrs['conditions'] and not attrs['effects']:
            raise serializers.ValidationError("A relation needs conditions or effects")
        return attrs


class SignSerializer(serializers.Serializer):
    name = serializers.CharField()
    image = GroupsField()
    significance = serializers.ListField(child=RelationSerializer(), required=False)
    personal_meaning = serializers.ListField(child=RelationSerializer(), required=False, default=list)
    xi = serializers.DictField(
        child=serializers.ListField(child=serializers.IntegerField(min_value=0)), required=False, default=dict
    )

    def validate_xi(self, value):
        for key in value:
            if not str(key).isdigit():
                raise serializers.ValidationError(f"Significance index expected, got {key!r}")
        return {str(int(k)): v for k, v in value.items()}


class PlaceSerializer(serializers.Serializer):
    cp = PointField()
    r_g = serializers.FloatField(min_value=0)


class AgentSerializer(serializers.Serializer):
    id = serializers.IntegerField()
    position = PointField()
    radius = serializers.FloatField(min_value=0, required=False, default=0.5)
    alpha_m = serializers.FloatField(min_value=0, max_value=180, required=False)
    alpha_fallback = serializers.FloatField(min_value=0, max_value=180, required=False)
    delta = serializers.IntegerField(min_value=1, required=False)
    introspection = serializers.BooleanField(required=False, default=True)
    self_sign = serializers.CharField()
    public_sign = serializers.CharField(required=False)
    places = serializers.DictField(child=PlaceSerializer(), allow_empty=False)
    goal_place = serializers.CharField()
    start = SituationField()
    goal = SituationField()
    kb = serializers.ListField(child=SignSerializer(), required=False, default=list)

    def validate_alpha_m(self, value):
        if value <= 0:
            raise serializers.ValidationError("Ensure this value is greater than 0.")
        return value


class LimitsSerializer(serializers.Serializer):
    iteration_cap = serializers.IntegerField(min_value=1, required=False)
    tick_cap = serializers.IntegerField(min_value=1, required=False)


class ScenarioSerializer(serializers.Serializer):
    """Structural validation of a scenario document"""
    name = serializers.CharField(required=False, default="scenario")
    world = WorldSerializer()
    common_signs = serializers.ListField(child=SignSerializer(), required=False, default=list)
    agents = serializers.ListField(child=AgentSerializer(), min_length=1)
    limits = LimitsSerializer(required=False, default=dict)
