import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'market_atlas.settings')
django.setup()
