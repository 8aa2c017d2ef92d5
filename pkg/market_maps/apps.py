from django.apps import AppConfig


class MarketMapsConfig(AppConfig):
    name = 'market_maps'
    verbose_name = 'Market maps'
