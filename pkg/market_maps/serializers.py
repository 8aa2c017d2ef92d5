from django.conf import settings
from rest_framework import serializers

from .preprocess import Representation
from .render import ColorBy

# RunConfig field -> settings.MARKET_MAPS key
DEFAULT_KEYS = {
    'scale': 'SCALE',
    'segments': 'SEGMENTS',
    'epsilon': 'EPSILON',
    'representation': 'REPRESENTATION',
    'initial_cash': 'INITIAL_CASH',
    'threshold': 'THRESHOLD',
    'counter_gap': 'COUNTER_GAP',
    'k': 'K',
    'rows': 'ROWS',
    'cols': 'COLS',
    'lam': 'LAMBDA',
    'mu': 'MU',
    'multipliers': 'MULTIPLIERS',
    'max_iter': 'MAX_ITER',
    'tol': 'TOL',
    'margin': 'MARGIN',
    'symbols': 'SYMBOLS',
    'days': 'DAYS',
    'regime_start': 'REGIME_START',
    'vol': 'VOL',
    'common_weight': 'COMMON_WEIGHT',
    'seed': 'SEED',
    'width': 'WIDTH',
    'height': 'HEIGHT',
}

# --synth key -> RunConfig field
SYNTH_KEYS = {
    'symbols': 'symbols',
    'days': 'days',
    'regime_start': 'regime_start',
    'vol': 'vol',
    'common_weight': 'common_weight',
}


def run_defaults():
    return {field: settings.MARKET_MAPS[key] for field, key in DEFAULT_KEYS.items()}


class CommaSeparatedField(serializers.ListField):
    """List field that also accepts ``a,b,c`` text, as config files give it."""

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item.strip() for item in data.split(',') if item.strip()]
        return super().to_internal_value(data)


# ============ RUN CONFIG ============

class RunConfigSerializer(serializers.Serializer):
    """Validates the merged command line, config file and settings defaults"""

    # data sources
    csv = CommaSeparatedField(child=serializers.CharField(), required=False, min_length=1)
    synth = serializers.CharField(required=False, allow_blank=True)
    input = serializers.CharField(required=False)
    coords = serializers.CharField(required=False)
    out = serializers.CharField(required=False)
    seed = serializers.IntegerField(min_value=0)

    # dataset
    scale = serializers.IntegerField(min_value=1)
    segments = serializers.IntegerField(min_value=1)
    epsilon = serializers.FloatField(min_value=0)
    representation = serializers.ChoiceField(choices=Representation.choices)
    rep = CommaSeparatedField(
        child=serializers.ChoiceField(choices=Representation.choices), required=False, min_length=1,
    )
    shifted = serializers.BooleanField(required=False)
    tsv = serializers.BooleanField(required=False)

    # backtest
    strategy = serializers.IntegerField(required=False, min_value=1, max_value=3)
    initial_cash = serializers.FloatField()
    threshold = serializers.FloatField(min_value=0)
    counter_gap = serializers.IntegerField(min_value=0)

    # pca
    k = serializers.IntegerField(min_value=1)

    # elastic map
    rows = serializers.IntegerField(min_value=2)
    cols = serializers.IntegerField(min_value=2)
    lam = serializers.FloatField()
    mu = serializers.FloatField(min_value=0)
    multipliers = CommaSeparatedField(child=serializers.FloatField(), min_length=1)
    max_iter = serializers.IntegerField(min_value=1)
    tol = serializers.FloatField(min_value=0)
    margin = serializers.FloatField(min_value=0)

    # synthetic market
    symbols = serializers.IntegerField(min_value=1)
    days = serializers.IntegerField(min_value=2)
    regime_start = serializers.IntegerField(min_value=0, allow_null=True)
    vol = serializers.FloatField(min_value=0)
    common_weight = serializers.FloatField(min_value=0, max_value=1)

    # render
    width = serializers.IntegerField(min_value=200)
    height = serializers.IntegerField(min_value=100)
    color_by = serializers.ChoiceField(choices=ColorBy.choices, required=False)
    title = serializers.CharField(required=False, allow_blank=True)

    def validate_initial_cash(self, value):
        if value <= 0:
            raise serializers.ValidationError("Initial cash must be positive")
        return value

    def validate_lam(self, value):
        if value <= 0:
            raise serializers.ValidationError("Lambda must be positive to keep the map solvable")
        return value

    def validate_multipliers(self, value):
        if any(multiplier <= 0 for multiplier in value):
            raise serializers.ValidationError("Phase multipliers must be positive")
        return value

    def validate_synth(self, value):
        params = {}
        for item in filter(None, (part.strip() for part in value.split(','))):
            key, sep, raw = item.partition('=')
            key = key.strip().replace('-', '_')
            if not sep or key not in SYNTH_KEYS:
                raise serializers.ValidationError(
                    f"Bad --synth item {item!r}; use key=value with keys {', '.join(SYNTH_KEYS)}"
                )
            params[SYNTH_KEYS[key]] = raw.strip()
        return params

    def validate(self, attrs):
        synth = attrs.get('synth') or {}
        if synth:
            # --synth values go through the same field validation as their flags
            checked = RunConfigSerializer(data={**run_defaults(), **synth})
            checked.is_valid(raise_exception=True)
            synth = {field: checked.validated_data[field] for field in synth}
            attrs['synth'] = synth
        days = synth.get('days', attrs['days'])
        regime_start = synth.get('regime_start', attrs['regime_start'])
        if regime_start is not None and regime_start >= days:
            raise serializers.ValidationError(
                {'regime_start': f'Regime start {regime_start} must be before day {days}'}
            )
        if 'csv' in attrs and 'synth' in attrs:
            raise serializers.ValidationError("Give either --csv or --synth, not both")
        return attrs
